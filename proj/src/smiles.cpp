#include "chemception/smiles.hpp"

#include <array>
#include <cctype>
#include <map>
#include <optional>
#include <set>

#include "chemception/errors.hpp"

namespace chemception {

namespace {

struct PendingRing {
  int atom;
  std::optional<BondOrder> order;
};

// Allowed valences, smallest first; used only to count implicit hydrogens.
const std::map<std::string, std::vector<int>> kValences = {
    {"H", {1}},  {"B", {3}},        {"C", {4}},        {"N", {3, 5}},
    {"O", {2}},  {"F", {1}},        {"P", {3, 5}},     {"S", {2, 4, 6}},
    {"Cl", {1}}, {"Br", {1}},       {"I", {1}},
};

int bond_order_units(BondOrder o) {
  switch (o) {
    case BondOrder::Single: return 1;
    case BondOrder::Double: return 2;
    case BondOrder::Triple: return 3;
    case BondOrder::Aromatic: return 1;
  }
  return 1;
}

class Parser {
 public:
  explicit Parser(const std::string& s) : s_(s) {}

  MolGraph run() {
    if (s_.empty()) throw SyntaxError("empty SMILES");
    for (unsigned char c : s_) {
      if (c >= 0x80) throw SyntaxError("non-ASCII character in SMILES");
    }
    while (pos_ < s_.size()) step();
    if (!branch_stack_.empty())
      throw SyntaxError("unbalanced '(' in '" + s_ + "'");
    if (!open_rings_.empty())
      throw SyntaxError("unmatched ring closure in '" + s_ + "'");
    if (g_.atoms.empty()) throw SyntaxError("no atoms in '" + s_ + "'");
    count_implicit_hydrogens();
    perceive_rings(g_);
    return std::move(g_);
  }

 private:
  void step() {
    char c = s_[pos_];
    switch (c) {
      case '(': {
        if (prev_atom_ < 0) throw SyntaxError("branch before any atom");
        branch_stack_.push_back(prev_atom_);
        ++pos_;
        break;
      }
      case ')': {
        if (branch_stack_.empty()) throw SyntaxError("unbalanced ')'");
        prev_atom_ = branch_stack_.back();
        branch_stack_.pop_back();
        ++pos_;
        break;
      }
      case '-': set_pending(BondOrder::Single); ++pos_; break;
      case '=': set_pending(BondOrder::Double); ++pos_; break;
      case '#': set_pending(BondOrder::Triple); ++pos_; break;
      case ':': set_pending(BondOrder::Aromatic); ++pos_; break;
      case '/':
      case '\\': set_pending(BondOrder::Single); ++pos_; break;  // stereo dropped
      case '.': throw MultiFragment("disconnected SMILES: '" + s_ + "'");
      case '%': {
        if (pos_ + 2 >= s_.size() || !std::isdigit((unsigned char)s_[pos_ + 1]) ||
            !std::isdigit((unsigned char)s_[pos_ + 2]))
          throw SyntaxError("bad %nn ring closure");
        ring_closure((s_[pos_ + 1] - '0') * 10 + (s_[pos_ + 2] - '0'));
        pos_ += 3;
        break;
      }
      case '[': parse_bracket_atom(); break;
      default: {
        if (std::isdigit((unsigned char)c)) {
          ring_closure(c - '0');
          ++pos_;
          break;
        }
        parse_organic_atom();
        break;
      }
    }
  }

  void set_pending(BondOrder o) {
    if (pending_bond_) throw SyntaxError("two bond symbols in a row");
    if (prev_atom_ < 0) throw SyntaxError("bond symbol before any atom");
    pending_bond_ = o;
  }

  // Bare (organic subset) atom: Cl/Br first, then single letters.
  void parse_organic_atom() {
    static const std::set<std::string> two = {"Cl", "Br"};
    static const std::set<std::string> one = {"B", "C", "N", "O", "P",
                                              "S", "F", "I"};
    static const std::set<std::string> arom = {"b", "c", "n", "o", "p", "s"};
    std::string sym;
    if (pos_ + 1 < s_.size() && two.count(s_.substr(pos_, 2))) {
      sym = s_.substr(pos_, 2);
      pos_ += 2;
    } else {
      sym = s_.substr(pos_, 1);
      if (one.count(sym)) {
        ++pos_;
      } else if (arom.count(sym)) {
        ++pos_;
        add_atom(std::string(1, std::toupper((unsigned char)sym[0])), true, 0, -1);
        return;
      } else if (sym == "*") {
        throw UnsupportedElement("wildcard atom in '" + s_ + "'");
      } else if (std::isalpha((unsigned char)sym[0])) {
        throw UnsupportedElement("element '" + sym + "' not supported");
      } else {
        throw SyntaxError(std::string("bad token '") + sym + "' in '" + s_ + "'");
      }
    }
    add_atom(sym, false, 0, -1);
  }

  // [<isotope?><symbol><chirality?><Hcount?><charge?>]
  void parse_bracket_atom() {
    std::size_t end = s_.find(']', pos_);
    if (end == std::string::npos) throw SyntaxError("unterminated '['");
    std::string body = s_.substr(pos_ + 1, end - pos_ - 1);
    pos_ = end + 1;
    std::size_t i = 0;
    if (i < body.size() && std::isdigit((unsigned char)body[i]))
      throw SyntaxError("isotope specifications not supported: [" + body + "]");

    bool aromatic = false;
    std::string sym;
    if (i < body.size() && std::islower((unsigned char)body[i])) {
      static const std::set<char> arom = {'b', 'c', 'n', 'o', 'p', 's'};
      if (!arom.count(body[i]))
        throw UnsupportedElement("element '" + std::string(1, body[i]) +
                                 "' not supported");
      aromatic = true;
      sym = std::string(1, std::toupper((unsigned char)body[i]));
      ++i;
    } else if (i < body.size() && std::isupper((unsigned char)body[i])) {
      sym = body.substr(i, 1);
      ++i;
      if (i < body.size() && std::islower((unsigned char)body[i])) {
        std::string two = sym + body[i];
        if (element_index(two) >= 0) {
          sym = two;
          ++i;
        }
      }
    } else if (i < body.size() && body[i] == '*') {
      throw UnsupportedElement("wildcard atom in '" + s_ + "'");
    } else {
      throw SyntaxError("bad bracket atom: [" + body + "]");
    }

    while (i < body.size() && body[i] == '@') ++i;  // chirality discarded

    int h_count = 0;
    if (i < body.size() && body[i] == 'H') {
      ++i;
      h_count = 1;
      if (i < body.size() && std::isdigit((unsigned char)body[i])) {
        h_count = body[i] - '0';
        ++i;
      }
    }

    int charge = 0;
    if (i < body.size() && (body[i] == '+' || body[i] == '-')) {
      int sign = body[i] == '+' ? 1 : -1;
      ++i;
      if (i < body.size() && std::isdigit((unsigned char)body[i])) {
        charge = sign * (body[i] - '0');
        ++i;
      } else {
        charge = sign;
        while (i < body.size() && body[i] == (sign > 0 ? '+' : '-')) {
          charge += sign;
          ++i;
        }
      }
    }
    if (i != body.size())
      throw SyntaxError("bad bracket atom: [" + body + "]");
    add_atom(sym, aromatic, charge, h_count);
  }

  void add_atom(const std::string& sym, bool aromatic, int charge, int h_count) {
    int e = element_index(sym);
    if (e < 0) throw UnsupportedElement("element '" + sym + "' not supported");
    Atom a;
    a.element = e;
    a.aromatic = aromatic;
    a.charge = charge;
    a.h_count = h_count;  // -1 = implicit, filled in later
    a.index = static_cast<int>(g_.atoms.size());
    g_.atoms.push_back(a);
    if (prev_atom_ >= 0) add_bond(prev_atom_, a.index, take_pending(a.index));
    else if (pending_bond_) throw SyntaxError("dangling bond symbol");
    prev_atom_ = a.index;
  }

  BondOrder take_pending(int new_atom) {
    if (pending_bond_) {
      BondOrder o = *pending_bond_;
      pending_bond_.reset();
      return o;
    }
    if (g_.atoms[prev_atom_].aromatic && g_.atoms[new_atom].aromatic)
      return BondOrder::Aromatic;
    return BondOrder::Single;
  }

  void ring_closure(int label) {
    if (prev_atom_ < 0) throw SyntaxError("ring closure before any atom");
    auto it = open_rings_.find(label);
    if (it == open_rings_.end()) {
      std::optional<BondOrder> o = pending_bond_;
      pending_bond_.reset();
      open_rings_[label] = {prev_atom_, o};
      return;
    }
    PendingRing open = it->second;
    open_rings_.erase(it);
    if (open.atom == prev_atom_)
      throw SyntaxError("ring closure bonds atom to itself");
    std::optional<BondOrder> here = pending_bond_;
    pending_bond_.reset();
    BondOrder order;
    if (open.order && here) {
      if (*open.order != *here)
        throw SyntaxError("conflicting ring-closure bond orders");
      order = *here;
    } else if (open.order) {
      order = *open.order;
    } else if (here) {
      order = *here;
    } else if (g_.atoms[open.atom].aromatic && g_.atoms[prev_atom_].aromatic) {
      order = BondOrder::Aromatic;
    } else {
      order = BondOrder::Single;
    }
    add_bond(open.atom, prev_atom_, order);
  }

  void add_bond(int a, int b, BondOrder order) {
    auto key = std::minmax(a, b);
    if (!seen_bonds_.insert(key).second)
      throw SyntaxError("duplicate bond between atoms");
    g_.bonds.push_back({a, b, order});
  }

  void count_implicit_hydrogens() {
    std::vector<int> order_sum(g_.atoms.size(), 0);
    for (const Bond& b : g_.bonds) {
      order_sum[b.a] += bond_order_units(b.order);
      order_sum[b.b] += bond_order_units(b.order);
    }
    for (Atom& a : g_.atoms) {
      if (a.h_count >= 0) continue;  // explicit bracket H-count
      int sum = order_sum[a.index] + (a.aromatic ? 1 : 0);
      a.h_count = 0;
      for (int v : kValences.at(kElements[a.element].symbol)) {
        if (v >= sum) {
          a.h_count = v - sum;
          break;
        }
      }
    }
  }

  const std::string& s_;
  std::size_t pos_ = 0;
  MolGraph g_;
  int prev_atom_ = -1;
  std::optional<BondOrder> pending_bond_;
  std::vector<int> branch_stack_;
  std::map<int, PendingRing> open_rings_;
  std::set<std::pair<int, int>> seen_bonds_;
};

}  // namespace

MolGraph parse_smiles(const std::string& s) { return Parser(s).run(); }

}  // namespace chemception
