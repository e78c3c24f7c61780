#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "chemception/autodiff.hpp"
#include "chemception/raster.hpp"
#include "chemception/rng.hpp"
#include "chemception/tensor.hpp"

namespace chemception {

enum class Head { Classification, Regression };

// Architecture family: depth tier T (inception blocks per segment) and
// reference filter width N. Branch widths inside each block are fixed
// multiples of N (floor-rounded); the stem carries 2N filters.
struct NetSpec {
  int tier = 1;
  int filters = 32;
  Head head = Head::Classification;
  double residual_scale = 1.0;

  bool operator==(const NetSpec&) const = default;
};

struct LedgerRow {
  std::string name;
  int h = 0;
  int w = 0;
  int c = 0;
  std::int64_t params = 0;
};

struct TrainMeta {
  std::uint32_t stage = 0;
  std::uint32_t epoch = 0;
  double best_val_loss = 0.0;
};

void validate(const NetSpec& spec);  // throws SpecInvalid

// Closed-form parameter count, kept independent of the graph builder so the
// two routes can be checked against each other.
std::int64_t analytic_param_count(const NetSpec& spec);

// Layer-by-layer shape and parameter ledger (what `inspect` prints).
std::vector<LedgerRow> shape_ledger(const NetSpec& spec);

inline int mul_floor(int n, int num, int den) { return (n * num) / den; }

template <typename T>
struct Network {
  NetSpec spec;
  Graph<T> graph;
  NodeRef<T> input;    // (B, 80, 80, 1)
  NodeRef<T> output;   // (B, 2) logits or (B, 1) values
  NodeRef<T> loss;     // scalar
  std::shared_ptr<std::vector<int>> labels;  // classification targets
  NodeRef<T> target;                         // regression targets (B, 1)
  std::vector<NodeRef<T>> params;
  std::int64_t param_count = 0;
  TrainMeta meta;

  Network() = default;
  Network(Network&&) = default;
  Network& operator=(Network&&) = default;
  Network(const Network&) = delete;

  std::vector<T> flatten_params() const {
    std::vector<T> flat;
    flat.reserve(static_cast<std::size_t>(param_count));
    for (const auto& p : params)
      flat.insert(flat.end(), p->value.data.begin(), p->value.data.end());
    return flat;
  }

  void load_flat_params(const std::vector<T>& flat) {
    if (static_cast<std::int64_t>(flat.size()) != param_count)
      throw VersionMismatch("parameter vector length " +
                            std::to_string(flat.size()) + " != " +
                            std::to_string(param_count));
    std::size_t off = 0;
    for (auto& p : params) {
      std::copy(flat.begin() + off, flat.begin() + off + p->value.data.size(),
                p->value.data.begin());
      off += p->value.data.size();
    }
  }
};

namespace detail {

// The block structure shared by the builder, the analytic count, and the
// ledger. Widths are per reference N; kernel extents per Figure-style
// conventions (1x7/7x1 in segment B, 1x3/3x1 in segment C).
struct ConvDef {
  const char* name;
  int kh, kw;
  int num, den;  // filter multiple num/den of N
  int stride = 1;
  Padding pad = Padding::Same;
};

inline const std::vector<std::vector<ConvDef>> kABranches = {
    {{"a_b1_1x1", 1, 1, 1, 1}},
    {{"a_b2_1x1", 1, 1, 1, 1}, {"a_b2_3x3", 3, 3, 1, 1}},
    {{"a_b3_1x1", 1, 1, 1, 1},
     {"a_b3_3x3a", 3, 3, 3, 2},
     {"a_b3_3x3b", 3, 3, 2, 1}},
};
inline const std::vector<std::vector<ConvDef>> kBBranches = {
    {{"b_b1_1x1", 1, 1, 1, 1}},
    {{"b_b2_1x1", 1, 1, 1, 1},
     {"b_b2_1x7", 1, 7, 5, 4},
     {"b_b2_7x1", 7, 1, 3, 2}},
};
inline const std::vector<std::vector<ConvDef>> kCBranches = {
    {{"c_b1_1x1", 1, 1, 1, 1}},
    {{"c_b2_1x1", 1, 1, 1, 1},
     {"c_b2_1x3", 1, 3, 7, 6},
     {"c_b2_3x1", 3, 1, 4, 3}},
};
inline const std::vector<std::vector<ConvDef>> kRedABranches = {
    {{"ra_b1_3x3", 3, 3, 3, 2, 2, Padding::Valid}},
    {{"ra_b2_1x1", 1, 1, 1, 1},
     {"ra_b2_3x3", 3, 3, 1, 1},
     {"ra_b2_3x3v", 3, 3, 3, 2, 2, Padding::Valid}},
};
inline const std::vector<std::vector<ConvDef>> kRedBBranches = {
    {{"rb_b1_1x1", 1, 1, 1, 1}, {"rb_b1_3x3", 3, 3, 3, 2, 2, Padding::Valid}},
    {{"rb_b2_1x1", 1, 1, 1, 1}, {"rb_b2_3x3", 3, 3, 9, 8, 2, Padding::Valid}},
    {{"rb_b3_1x1", 1, 1, 1, 1},
     {"rb_b3_3x3", 3, 3, 9, 8},
     {"rb_b3_3x3v", 3, 3, 5, 4, 2, Padding::Valid}},
};

}  // namespace detail

template <typename T>
Network<T> build(const NetSpec& spec) {
  validate(spec);
  const int n = spec.filters;
  Network<T> net;
  net.spec = spec;
  Graph<T>& g = net.graph;

  auto conv_params = [&](const std::string& name, int kh, int kw, int cin,
                         int cout) {
    auto w = g.param(Tensor<T>({kh, kw, cin, cout}), name + ".w");
    auto b = g.param(Tensor<T>({cout}), name + ".b");
    net.params.push_back(w);
    net.params.push_back(b);
    return std::pair{w, b};
  };

  auto conv_unit = [&](const std::string& name, NodeRef<T> x, int cin,
                       const detail::ConvDef& d, bool relu_after) {
    int cout = mul_floor(n, d.num, d.den);
    auto [w, b] = conv_params(name, d.kh, d.kw, cin, cout);
    auto y = g.conv2d(x, w, b, d.stride, d.pad, name);
    if (relu_after) y = g.relu(y, name + ".relu");
    return std::pair{y, cout};
  };

  auto inception = [&](const std::string& tag,
                       const std::vector<std::vector<detail::ConvDef>>& branches,
                       NodeRef<T> x, int cin) {
    std::vector<NodeRef<T>> outs;
    int concat_c = 0;
    for (const auto& branch : branches) {
      NodeRef<T> y = x;
      int c = cin;
      for (const auto& d : branch) {
        auto [ny, nc] = conv_unit(tag + "." + d.name, y, c, d, true);
        y = ny;
        c = nc;
      }
      outs.push_back(y);
      concat_c += c;
    }
    auto cat = g.concat_channels(outs, tag + ".concat");
    // final linear 1x1 projection back to the block input channels
    auto [w, b] = conv_params(tag + ".proj", 1, 1, concat_c, cin);
    auto proj = g.conv2d(cat, w, b, 1, Padding::Same, tag + ".proj");
    auto scaled = g.scale(proj, spec.residual_scale, tag + ".scale");
    return g.relu(g.residual_add(x, scaled, tag + ".residual"), tag + ".relu");
  };

  auto reduction = [&](const std::string& tag,
                       const std::vector<std::vector<detail::ConvDef>>& branches,
                       NodeRef<T> x, int cin) {
    std::vector<NodeRef<T>> outs = {
        g.max_pool(x, 3, 2, Padding::Valid, tag + ".pool")};
    int out_c = cin;
    for (const auto& branch : branches) {
      NodeRef<T> y = x;
      int c = cin;
      for (const auto& d : branch) {
        auto [ny, nc] = conv_unit(tag + "." + d.name, y, c, d, true);
        y = ny;
        c = nc;
      }
      outs.push_back(y);
      out_c += c;
    }
    return std::pair{g.concat_channels(outs, tag + ".concat"), out_c};
  };

  net.input = g.input({1, kGridSize, kGridSize, 1});

  // stem: single 4x4 stride-2 valid conv, 2N filters
  auto [stem, c_a] = conv_unit(
      "stem", net.input, 1,
      detail::ConvDef{"stem", 4, 4, 2, 1, 2, Padding::Valid}, true);

  NodeRef<T> x = stem;
  for (int t = 0; t < spec.tier; ++t)
    x = inception("A" + std::to_string(t + 1), detail::kABranches, x, c_a);
  auto [ra, c_b] = reduction("RedA", detail::kRedABranches, x, c_a);
  x = ra;
  for (int t = 0; t < spec.tier; ++t)
    x = inception("B" + std::to_string(t + 1), detail::kBBranches, x, c_b);
  auto [rb, c_c] = reduction("RedB", detail::kRedBBranches, x, c_b);
  x = rb;
  for (int t = 0; t < spec.tier; ++t)
    x = inception("C" + std::to_string(t + 1), detail::kCBranches, x, c_c);

  auto pooled = g.global_avg_pool(x, "gap");
  const int units = spec.head == Head::Classification ? 2 : 1;
  auto hw = g.param(Tensor<T>({c_c, units}), "head.w");
  auto hb = g.param(Tensor<T>({units}), "head.b");
  net.params.push_back(hw);
  net.params.push_back(hb);
  net.output = g.dense(pooled, hw, hb, "head");

  if (spec.head == Head::Classification) {
    net.labels = std::make_shared<std::vector<int>>(1, 0);
    net.loss = g.softmax_xent(net.output, net.labels, "loss");
  } else {
    net.target = g.input({1, 1}, "target");
    net.loss = g.mse_loss(net.output, net.target, "loss");
  }

  for (const auto& p : net.params) net.param_count += p->value.size();
  if (net.param_count != analytic_param_count(spec))
    throw SpecInvalid("realized parameter count " +
                      std::to_string(net.param_count) +
                      " disagrees with the analytic count " +
                      std::to_string(analytic_param_count(spec)));
  return net;
}

// He-normal weights (variance 2/fan_in), zero biases, one seeded stream in
// parameter order.
template <typename T>
void init_params(Network<T>& net, std::uint64_t seed) {
  Rng rng(derive_seed(seed, 0xC0DE));
  for (auto& p : net.params) {
    const auto& s = p->value.shape;
    bool is_bias = s.size() == 1;
    if (is_bias) {
      p->value.fill(T(0));
      continue;
    }
    std::int64_t fan_in = 1;
    for (std::size_t i = 0; i + 1 < s.size(); ++i) fan_in *= s[i];
    double stddev = std::sqrt(2.0 / static_cast<double>(fan_in));
    for (auto& v : p->value.data) v = static_cast<T>(stddev * rng.normal());
  }
}

// Copy a batch of images into the input placeholder (codes become reals
// unchanged) and run the graph. Returns the head output.
template <typename T>
Tensor<T> forward(Network<T>& net, const std::vector<MolImage>& batch) {
  if (batch.empty()) throw EmptyInput("empty batch");
  const int b = static_cast<int>(batch.size());
  net.input->value = Tensor<T>({b, kGridSize, kGridSize, 1});
  for (int i = 0; i < b; ++i)
    for (int p = 0; p < kGridSize * kGridSize; ++p)
      net.input->value[static_cast<std::int64_t>(i) * kGridSize * kGridSize +
                       p] = static_cast<T>(batch[i].pixels[p]);
  if (net.labels && static_cast<int>(net.labels->size()) != b)
    net.labels->assign(b, 0);
  if (net.target && net.target->value.dim(0) != b)
    net.target->value = Tensor<T>({b, 1});
  net.graph.forward();
  return net.output->value;
}

}  // namespace chemception
