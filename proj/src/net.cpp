#include "chemception/net.hpp"

#include "chemception/errors.hpp"

namespace chemception {

void validate(const NetSpec& spec) {
  if (spec.tier < 1) throw SpecInvalid("tier must be >= 1");
  if (spec.filters < 1) throw SpecInvalid("filters must be >= 1");
  if (!std::isfinite(spec.residual_scale))
    throw SpecInvalid("residual_scale must be finite");
}

namespace {

std::int64_t conv_count(int kh, int kw, int cin, int cout) {
  return static_cast<std::int64_t>(kh) * kw * cin * cout + cout;
}

struct Walk {
  const NetSpec& spec;
  std::vector<LedgerRow> rows;
  int h = kGridSize, w = kGridSize;

  void conv_row(const std::string& name, const detail::ConvDef& d, int& cin,
                bool advance_spatial) {
    int cout = mul_floor(spec.filters, d.num, d.den);
    std::int64_t p = conv_count(d.kh, d.kw, cin, cout);
    int oh = conv_out_dim(h, d.kh, d.stride, d.pad);
    int ow = conv_out_dim(w, d.kw, d.stride, d.pad);
    rows.push_back({name, oh, ow, cout, p});
    if (advance_spatial) {
      h = oh;
      w = ow;
    }
    cin = cout;
  }

  // inception block: parallel branches, concat, linear 1x1 projection back
  // to the input width, residual
  void inception(const std::string& tag,
                 const std::vector<std::vector<detail::ConvDef>>& branches,
                 int cin) {
    int concat_c = 0;
    for (const auto& branch : branches) {
      int c = cin;
      for (const auto& d : branch) conv_row(tag + "." + d.name, d, c, false);
      concat_c += c;
    }
    rows.push_back({tag + ".concat", h, w, concat_c, 0});
    rows.push_back({tag + ".proj(linear)", h, w, cin,
                    conv_count(1, 1, concat_c, cin)});
    rows.push_back({tag + ".residual", h, w, cin, 0});
  }

  // reduction: stride-2 valid branches plus a 3x3/2 max-pool pass-through
  int reduction(const std::string& tag,
                const std::vector<std::vector<detail::ConvDef>>& branches,
                int cin) {
    int oh = conv_out_dim(h, 3, 2, Padding::Valid);
    int ow = conv_out_dim(w, 3, 2, Padding::Valid);
    rows.push_back({tag + ".pool", oh, ow, cin, 0});
    int out_c = cin;
    for (const auto& branch : branches) {
      int c = cin;
      for (const auto& d : branch) conv_row(tag + "." + d.name, d, c, false);
      out_c += c;
    }
    h = oh;
    w = ow;
    rows.push_back({tag + ".concat", h, w, out_c, 0});
    return out_c;
  }
};

}  // namespace

std::vector<LedgerRow> shape_ledger(const NetSpec& spec) {
  validate(spec);
  Walk walk{spec};
  const int n = spec.filters;

  int c = 1;
  walk.conv_row("stem", {"stem", 4, 4, 2, 1, 2, Padding::Valid}, c, true);
  if (walk.h != 39 || walk.w != 39)
    throw SpecInvalid("stem must map 80x80 to 39x39");

  int c_a = c;  // 2N
  for (int t = 0; t < spec.tier; ++t)
    walk.inception("A" + std::to_string(t + 1), detail::kABranches, c_a);
  int c_b = walk.reduction("RedA", detail::kRedABranches, c_a);
  if (walk.h != 19 || walk.w != 19)
    throw SpecInvalid("Reduction-A must map 39x39 to 19x19");
  if (c_b != 5 * n)
    throw SpecInvalid("Reduction-A channel ledger broken");

  for (int t = 0; t < spec.tier; ++t)
    walk.inception("B" + std::to_string(t + 1), detail::kBBranches, c_b);
  int c_c = walk.reduction("RedB", detail::kRedBBranches, c_b);
  if (walk.h != 9 || walk.w != 9)
    throw SpecInvalid("Reduction-B must map 19x19 to 9x9");
  if (c_c != c_b + mul_floor(n, 3, 2) + mul_floor(n, 9, 8) + mul_floor(n, 5, 4))
    throw SpecInvalid("Reduction-B channel ledger broken");

  for (int t = 0; t < spec.tier; ++t)
    walk.inception("C" + std::to_string(t + 1), detail::kCBranches, c_c);

  walk.rows.push_back({"gap", 1, 1, c_c, 0});
  const int units = spec.head == Head::Classification ? 2 : 1;
  walk.rows.push_back({"head", 1, 1, units,
                       static_cast<std::int64_t>(c_c) * units + units});
  return walk.rows;
}

std::int64_t analytic_param_count(const NetSpec& spec) {
  std::int64_t total = 0;
  for (const LedgerRow& row : shape_ledger(spec)) total += row.params;
  return total;
}

}  // namespace chemception
