#include "papa/problems.hpp"

#include "papa/random.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>

namespace papa {

namespace {

using VecT = Vec<double>;
using MatT = Mat<double>;

double param(const InstanceInfo& info, const std::string& key) {
  auto it = info.params.find(key);
  if (it == info.params.end())
    throw ConfigError("instance description lacks parameter '" + key + "'");
  return it->second;
}

}  // namespace

ProblemInstance<double> make_qp(const QpData& d) {
  const Index p2 = d.Q.rows(), n = d.B.rows();
  if (d.Q.cols() != p2) throw DimensionError("make_qp: Q must be square");
  check_length(p2, d.q.size(), "make_qp: q");
  check_length(p2, d.B.cols(), "make_qp: columns of B");
  check_length(n, d.lower.size(), "make_qp: lower bound");
  check_length(n, d.upper.size(), "make_qp: upper bound");

  ProblemInstance<double> p;
  p.f = ProxFunction<double>::box(d.lower, d.upper);
  p.g = ProxFunction<double>::quadratic(d.Q, d.q);
  const auto B = LinearMap<double>::dense(d.B);
  p.constraint.A = LinearMap<double>::identity(n);
  p.constraint.B = LinearMap<double>::negated(B);
  p.constraint.c = VecT::Zero(n);
  p.constraint.K = ConvexSet<double>::zero(n);
  p.exact_x_solver = shrinkage_x_solver(p.f, 1, p.constraint.B, p.constraint.c);

  const ProxFunction<double> g = p.g;
  p.original_objective = [g](const VecT& y) { return value(g, y); };
  const VecT lo = d.lower, hi = d.upper;
  const double scale = std::max(lo.norm(), hi.norm());
  p.feasibility = [B, lo, hi, scale](const VecT&, const VecT& y) {
    const VecT By = B.apply(y);
    const double over = (By - hi).cwiseMax(0.0).norm();
    const double under = (By - lo).cwiseMin(0.0).norm();
    return (over + under) / (scale > 0 ? scale : 1.0);
  };
  p.info.kind = "qp-data";
  return p;
}

QpData qp_data(const ProblemInstance<double>& p) {
  if (p.f.kind != ProxKind::box || p.g.kind != ProxKind::quadratic ||
      p.constraint.A.identity_sign() != 1 ||
      p.constraint.K.kind != SetKind::singleton_zero ||
      p.constraint.c.cwiseAbs().maxCoeff() != 0.0 || p.h)
    throw ConfigError("qp_data: instance is not a box-constrained QP");
  QpData d;
  d.Q = p.g.Q;
  d.q = p.g.q;
  d.B = -p.constraint.B.to_dense();
  d.lower = p.f.lower;
  d.upper = p.f.upper;
  return d;
}

ProblemInstance<double> gen_qp(Index p2, Index n, bool strongly_convex,
                               std::uint64_t seed) {
  if (p2 < 1 || n < 1) throw ConfigError("gen_qp: sizes must be positive");
  const Index m = p2 / 2 + 1;
  const double mu = strongly_convex ? 1.0 : 0.0;
  QpData d;
  RandomStream rs_R(seed, "R"), rs_q(seed, "q"), rs_B(seed, "B"), rs_y(seed, "ynat"),
      rs_u(seed, "u");
  const MatT R = rs_R.normal_matrix(p2, m) / std::sqrt(double(m));
  d.Q = R * R.transpose();
  d.Q.diagonal().array() += mu;
  d.q = rs_q.normal_vector(p2);
  d.B = rs_B.normal_matrix(n, p2) / std::sqrt(double(n));
  const VecT ynat = rs_y.normal_vector(p2);
  const VecT By = d.B * ynat;
  VecT u(n);
  for (Index i = 0; i < n; ++i) {
    double v;
    do v = rs_u.uniform(); while (v == 0.0);  // open interval
    u[i] = v;
  }
  d.lower = By - u;
  d.upper = By + u;
  auto p = make_qp(d);
  p.info.kind = "qp";
  p.info.seed = seed;
  p.info.params = {{"p2", double(p2)}, {"n", double(n)},
                   {"strongly_convex", strongly_convex ? 1.0 : 0.0}};
  return p;
}

ProblemInstance<double> gen_elastic_sqrt(Index p2, Index n, Index s, double kappa1,
                                         double kappa2, double noise_sigma,
                                         std::uint64_t seed) {
  if (p2 < 1 || n < 1) throw ConfigError("gen_elastic_sqrt: sizes must be positive");
  if (s < 0 || s > p2) throw ConfigError("gen_elastic_sqrt: sparsity must lie in [0, p2]");
  if (kappa1 < 0 || kappa2 < 0)
    throw ConfigError("gen_elastic_sqrt: regularization weights must be nonnegative");
  RandomStream rs_B(seed, "B"), rs_sup(seed, "support"), rs_y(seed, "ynat"),
      rs_e(seed, "noise");
  const MatT Bm = rs_B.normal_matrix(n, p2) / std::sqrt(double(n));
  const auto perm = rs_sup.permutation(p2);
  VecT ynat = VecT::Zero(p2);
  for (Index i = 0; i < s; ++i) ynat[perm[std::size_t(i)]] = rs_y.normal();
  VecT c = Bm * ynat;
  if (noise_sigma != 0.0) c += noise_sigma * rs_e.normal_vector(n);

  ProblemInstance<double> p;
  p.f = ProxFunction<double>::l2_norm();
  p.g = ProxFunction<double>::elastic(kappa1, kappa2);
  const auto B = LinearMap<double>::dense(Bm);
  p.constraint.A = LinearMap<double>::negated(LinearMap<double>::identity(n));
  p.constraint.B = B;
  p.constraint.c = c;
  p.constraint.K = ConvexSet<double>::zero(n);
  p.exact_x_solver = shrinkage_x_solver(p.f, -1, B, c);
  const ProxFunction<double> g = p.g;
  p.original_objective = [B, c, g](const VecT& y) {
    return (B.apply(y) - c).norm() + value(g, y);
  };
  p.info.kind = "elastic-sqrt";
  p.info.seed = seed;
  p.info.params = {{"p2", double(p2)},         {"n", double(n)},
                   {"s", double(s)},           {"kappa1", kappa1},
                   {"kappa2", kappa2},         {"noise_sigma", noise_sigma}};
  return p;
}

ProblemInstance<double> gen_tv_recon(Index height, Index width, double sample_rate,
                                     double kappa, double noise_sigma,
                                     std::uint64_t seed, bool constant_image) {
  if (height < 2 || width < 2) throw ConfigError("gen_tv_recon: image must be at least 2x2");
  if (!(sample_rate > 0.0 && sample_rate <= 1.0))
    throw ConfigError("gen_tv_recon: sample_rate must lie in (0, 1]");
  if (kappa < 0) throw ConfigError("gen_tv_recon: kappa must be nonnegative");
  const Index N = height * width;

  // Piecewise-constant phantom: a bright rectangle and a dimmer disk.
  VecT img = VecT::Zero(N);
  for (Index j = 0; j < width; ++j)
    for (Index i = 0; i < height; ++i) {
      double v = 0.0;
      if (constant_image) {
        v = 1.0;
      } else {
        if (i >= height / 5 && i < height / 2 && j >= width / 5 && j < (3 * width) / 5) v = 1.0;
        const double di = double(i) - 0.65 * double(height);
        const double dj = double(j) - 0.6 * double(width);
        if (di * di + dj * dj <= 0.04 * double(height * width)) v = 0.5;
      }
      img[i + height * j] = v;
    }

  RandomStream rs_M(seed, "measurement"), rs_rows(seed, "rows"), rs_e(seed, "noise");
  const Index m = std::max<Index>(1, Index(std::ceil(sample_rate * double(N) - 1e-9)));
  const MatT G = rs_M.normal_matrix(N, N) / std::sqrt(double(N));
  auto perm = rs_rows.permutation(N);
  std::vector<Index> rows(perm.begin(), perm.begin() + m);
  std::sort(rows.begin(), rows.end());
  const auto M = LinearMap<double>::row_subsampled(LinearMap<double>::dense(G), rows);
  VecT b = M.apply(img);
  if (noise_sigma != 0.0) b += noise_sigma * rs_e.normal_vector(m);

  SmoothTerm<double> h;
  h.value = [M, b](const VecT& y) { return 0.5 * (M.apply(y) - b).squaredNorm(); };
  h.gradient = [M, b](const VecT& y) { return VecT(M.adjoint_apply(VecT(M.apply(y) - b))); };
  h.lipschitz = op_norm_sq(M);
  h.mu = 0.0;

  const auto D = LinearMap<double>::gradient2d(height, width);
  ProblemInstance<double> p;
  p.f = ProxFunction<double>::l1(kappa, D.rows());
  p.g = ProxFunction<double>::zero();
  p.h = h;
  p.constraint.A = LinearMap<double>::identity(D.rows());
  p.constraint.B = LinearMap<double>::negated(D);
  p.constraint.c = VecT::Zero(D.rows());
  p.constraint.K = ConvexSet<double>::zero(D.rows());
  p.exact_x_solver = shrinkage_x_solver(p.f, 1, p.constraint.B, p.constraint.c);
  const ProxFunction<double> f = p.f;
  p.original_objective = [h, f, D](const VecT& y) {
    return h.value(y) + value(f, D.apply(y));
  };
  p.info.kind = "tv";
  p.info.seed = seed;
  p.info.params = {{"height", double(height)},
                   {"width", double(width)},
                   {"sample_rate", sample_rate},
                   {"kappa", kappa},
                   {"noise_sigma", noise_sigma},
                   {"constant_image", constant_image ? 1.0 : 0.0}};
  return p;
}

CompositeProblem<double> gen_sqrt_composite(Index p, double kappa1, double kappa2,
                                            std::uint64_t seed) {
  if (p < 1) throw ConfigError("gen_sqrt_composite: size must be positive");
  RandomStream rs_sup(seed, "support"), rs_y(seed, "ynat"), rs_e(seed, "noise");
  const auto perm = rs_sup.permutation(p);
  VecT d = VecT::Zero(p);
  const Index s = std::max<Index>(1, p / 10);
  for (Index i = 0; i < s; ++i) d[perm[std::size_t(i)]] = rs_y.normal();
  d += 0.1 * rs_e.normal_vector(p);
  CompositeProblem<double> cp;
  cp.f = ProxFunction<double>::l2_norm().shifted(d);
  cp.K = LinearMap<double>::identity(p);
  cp.g = ProxFunction<double>::elastic(kappa1, kappa2);
  return cp;
}

ProblemInstance<double> gen_sqrt_composite_instance(Index p, double kappa1,
                                                    double kappa2, std::uint64_t seed) {
  auto inst = to_template(gen_sqrt_composite(p, kappa1, kappa2, seed));
  inst.info.kind = "sqrt-composite";
  inst.info.seed = seed;
  inst.info.params = {{"p", double(p)}, {"kappa1", kappa1}, {"kappa2", kappa2}};
  return inst;
}

std::string describe(const InstanceInfo& info) {
  nlohmann::ordered_json j;
  j["kind"] = info.kind;
  j["seed"] = info.seed;
  nlohmann::ordered_json params = nlohmann::ordered_json::object();
  for (const auto& [k, v] : info.params) params[k] = v;
  j["params"] = params;
  return j.dump();
}

ProblemInstance<double> regenerate(const std::string& text) {
  const auto j = nlohmann::json::parse(text);
  InstanceInfo info;
  info.kind = j.at("kind").get<std::string>();
  info.seed = j.at("seed").get<std::uint64_t>();
  for (const auto& [k, v] : j.at("params").items()) info.params[k] = v.get<double>();
  const auto I = [&](const char* k) { return Index(std::llround(param(info, k))); };
  if (info.kind == "qp")
    return gen_qp(I("p2"), I("n"), param(info, "strongly_convex") != 0.0, info.seed);
  if (info.kind == "elastic-sqrt")
    return gen_elastic_sqrt(I("p2"), I("n"), I("s"), param(info, "kappa1"),
                            param(info, "kappa2"), param(info, "noise_sigma"), info.seed);
  if (info.kind == "tv")
    return gen_tv_recon(I("height"), I("width"), param(info, "sample_rate"),
                        param(info, "kappa"), param(info, "noise_sigma"), info.seed,
                        param(info, "constant_image") != 0.0);
  if (info.kind == "sqrt-composite")
    return gen_sqrt_composite_instance(I("p"), param(info, "kappa1"),
                                       param(info, "kappa2"), info.seed);
  throw ConfigError("unknown instance kind '" + info.kind + "'");
}

}  // namespace papa
