#include "eyeid/classifier.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <istream>
#include <limits>
#include <map>
#include <ostream>
#include <random>
#include <sstream>

#include "eyeid/error.hpp"
#include "eyeid/kernels.hpp"

namespace eyeid {

namespace {

constexpr const char* kModelMagic = "eyeid-rbfn";
constexpr int kModelVersion = 1;

// Portable uniform in [0, 1): std distributions are implementation-defined.
double uniform01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

Eigen::MatrixXd to_matrix(const std::vector<FeatureVector>& vs, std::size_t dim) {
  Eigen::MatrixXd m(static_cast<Eigen::Index>(vs.size()), static_cast<Eigen::Index>(dim));
  for (std::size_t i = 0; i < vs.size(); ++i) {
    if (vs[i].values.size() != dim) {
      throw ComputeError("feature dimension mismatch: expected " + std::to_string(dim) +
                         ", got " + std::to_string(vs[i].values.size()));
    }
    for (std::size_t j = 0; j < dim; ++j) {
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = vs[i].values[j];
    }
  }
  return m;
}

Eigen::MatrixXd kmeans_plus_plus(const Eigen::MatrixXd& x, int k, std::mt19937_64& rng) {
  const Eigen::Index n = x.rows();
  std::vector<Eigen::Index> chosen;
  chosen.push_back(static_cast<Eigen::Index>(uniform01(rng) * static_cast<double>(n)));
  std::vector<double> d2(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) {
    d2[static_cast<std::size_t>(i)] = (x.row(i) - x.row(chosen[0])).squaredNorm();
  }
  while (static_cast<int>(chosen.size()) < k) {
    double total = 0.0;
    for (double d : d2) total += d;
    if (!(total > 0.0)) break;  // every point already coincides with a center
    const double target = uniform01(rng) * total;
    double acc = 0.0;
    Eigen::Index pick = n - 1;
    for (Eigen::Index i = 0; i < n; ++i) {
      acc += d2[static_cast<std::size_t>(i)];
      if (acc > target && d2[static_cast<std::size_t>(i)] > 0.0) {
        pick = i;
        break;
      }
    }
    while (d2[static_cast<std::size_t>(pick)] == 0.0) --pick;
    chosen.push_back(pick);
    for (Eigen::Index i = 0; i < n; ++i) {
      d2[static_cast<std::size_t>(i)] =
          std::min(d2[static_cast<std::size_t>(i)], (x.row(i) - x.row(pick)).squaredNorm());
    }
  }
  Eigen::MatrixXd centers(static_cast<Eigen::Index>(chosen.size()), x.cols());
  for (std::size_t c = 0; c < chosen.size(); ++c) {
    centers.row(static_cast<Eigen::Index>(c)) = x.row(chosen[c]);
  }
  return centers;
}

Eigen::MatrixXd lloyd(const Eigen::MatrixXd& x, Eigen::MatrixXd centers, int max_iters) {
  const auto n = static_cast<std::size_t>(x.rows());
  const Eigen::Index k = centers.rows();
  std::vector<int> assign(n, -1), next(n);
  std::vector<double> d2(n);
  for (int it = 0; it < max_iters; ++it) {
    kernels::omp::nearest_centers(x, centers, next, d2);
    if (next == assign) break;
    assign = next;
    Eigen::MatrixXd sums = Eigen::MatrixXd::Zero(k, x.cols());
    std::vector<int> counts(static_cast<std::size_t>(k), 0);
    for (std::size_t i = 0; i < n; ++i) {
      sums.row(assign[i]) += x.row(static_cast<Eigen::Index>(i));
      ++counts[static_cast<std::size_t>(assign[i])];
    }
    for (Eigen::Index c = 0; c < k; ++c) {
      if (counts[static_cast<std::size_t>(c)] > 0) {
        centers.row(c) = sums.row(c) / counts[static_cast<std::size_t>(c)];
        continue;
      }
      // Empty cluster: move it onto the worst-served point.
      const auto far = static_cast<std::size_t>(
          std::max_element(d2.begin(), d2.end()) - d2.begin());
      centers.row(c) = x.row(static_cast<Eigen::Index>(far));
      d2[far] = 0.0;
    }
  }
  return centers;
}

std::vector<double> center_widths(const Eigen::MatrixXd& centers, const Eigen::MatrixXd& x,
                                  const RbfnOptions& opt) {
  const Eigen::Index k = centers.rows();
  std::vector<double> widths(static_cast<std::size_t>(k));
  if (k == 1) {
    const double rms = std::sqrt((x.rowwise() - centers.row(0)).rowwise().squaredNorm().mean());
    widths[0] = rms > opt.min_width ? rms : 1.0;
    return widths;
  }
  const int q = std::min<int>(opt.width_neighbors, static_cast<int>(k) - 1);
  std::vector<double> dist;
  for (Eigen::Index c = 0; c < k; ++c) {
    dist.clear();
    for (Eigen::Index o = 0; o < k; ++o) {
      if (o != c) dist.push_back((centers.row(c) - centers.row(o)).norm());
    }
    std::partial_sort(dist.begin(), dist.begin() + q, dist.end());
    double mean = 0.0;
    for (int i = 0; i < q; ++i) mean += dist[static_cast<std::size_t>(i)];
    mean /= q;
    widths[static_cast<std::size_t>(c)] = std::max(mean, opt.min_width);
  }
  return widths;
}

Eigen::MatrixXd design_matrix(const RbfnModel& model, const Eigen::MatrixXd& x) {
  Eigen::MatrixXd act;
  kernels::omp::rbf_activations(x, model.centers, model.widths, act);
  Eigen::MatrixXd h(x.rows(), act.cols() + 1);
  h.leftCols(act.cols()) = act;
  h.col(act.cols()).setOnes();
  return h;
}

void softmax_rows(Eigen::MatrixXd& z) {
  for (Eigen::Index r = 0; r < z.rows(); ++r) {
    const double mx = z.row(r).maxCoeff();
    z.row(r) = (z.row(r).array() - mx).exp().matrix();
    z.row(r) /= z.row(r).sum();
  }
}

void write_hex(std::ostream& out, double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::hex);
  out.write(buf, res.ptr - buf);
}

double read_hex(std::istream& in) {
  std::string tok;
  if (!(in >> tok)) throw DataError("model file truncated");
  double v = 0.0;
  auto res = std::from_chars(tok.data(), tok.data() + tok.size(), v, std::chars_format::hex);
  if (res.ec != std::errc() || res.ptr != tok.data() + tok.size()) {
    throw DataError("model file: bad number '" + tok + "'");
  }
  return v;
}

void expect(std::istream& in, const std::string& word) {
  std::string tok;
  if (!(in >> tok) || tok != word) {
    throw DataError("model file: expected '" + word + "', found '" + tok + "'");
  }
}

}  // namespace

bool RbfnModel::operator==(const RbfnModel& o) const {
  return centers.rows() == o.centers.rows() && centers.cols() == o.centers.cols() &&
         centers == o.centers && widths == o.widths &&
         output_weights.rows() == o.output_weights.rows() &&
         output_weights.cols() == o.output_weights.cols() &&
         output_weights == o.output_weights && class_labels == o.class_labels &&
         seed == o.seed && schema == o.schema;
}

RbfnModel rbfn_train(const std::vector<FeatureVector>& train, std::uint64_t seed,
                     const RbfnOptions& options, const FeatureSchema& schema) {
  if (train.empty()) throw DataError("rbfn_train: empty training set");
  if (options.centers_per_class < 1) throw UsageError("centers_per_class must be >= 1");

  RbfnModel model;
  model.seed = seed;
  model.schema = schema;
  std::map<std::string, int> index;
  for (const auto& fv : train) index.emplace(fv.participant_id, 0);
  int next = 0;
  for (auto& [label, idx] : index) {
    idx = next++;
    model.class_labels.push_back(label);
  }

  const std::size_t dim = train.front().values.size();
  const Eigen::MatrixXd x = to_matrix(train, dim);
  if (!x.allFinite()) throw ComputeError("rbfn_train: non-finite feature values");

  // k-means within each class.
  std::mt19937_64 rng(seed);
  std::vector<std::vector<Eigen::Index>> rows(index.size());
  for (std::size_t i = 0; i < train.size(); ++i) {
    rows[static_cast<std::size_t>(index.at(train[i].participant_id))].push_back(
        static_cast<Eigen::Index>(i));
  }
  std::vector<Eigen::MatrixXd> blocks;
  Eigen::Index total = 0;
  for (const auto& r : rows) {
    const Eigen::MatrixXd xc = x(r, Eigen::all);
    const int k = std::min<int>(options.centers_per_class, static_cast<int>(r.size()));
    blocks.push_back(lloyd(xc, kmeans_plus_plus(xc, k, rng), options.max_kmeans_iterations));
    total += blocks.back().rows();
  }
  model.centers.resize(total, static_cast<Eigen::Index>(dim));
  Eigen::Index at = 0;
  for (const auto& b : blocks) {
    model.centers.middleRows(at, b.rows()) = b;
    at += b.rows();
  }
  model.widths = center_widths(model.centers, x, options);

  const Eigen::MatrixXd h = design_matrix(model, x);
  Eigen::MatrixXd y = Eigen::MatrixXd::Zero(x.rows(), static_cast<Eigen::Index>(index.size()));
  for (std::size_t i = 0; i < train.size(); ++i) {
    y(static_cast<Eigen::Index>(i), index.at(train[i].participant_id)) = 1.0;
  }
  Eigen::MatrixXd gram = h.transpose() * h;
  gram.diagonal().array() += options.ridge;
  model.output_weights = gram.ldlt().solve(h.transpose() * y);
  if (!model.output_weights.allFinite()) throw ComputeError("rbfn_train: singular read-out");
  return model;
}

Eigen::MatrixXd rbfn_predict_all(const RbfnModel& model,
                                 const std::vector<FeatureVector>& vectors) {
  const Eigen::MatrixXd x = to_matrix(vectors, model.dimension());
  Eigen::MatrixXd z = design_matrix(model, x) * model.output_weights;
  softmax_rows(z);
  return z;
}

Distribution rbfn_predict(const RbfnModel& model, const std::vector<double>& values) {
  const Eigen::MatrixXd p = rbfn_predict_all(model, {FeatureVector{values, {}, {}}});
  return Distribution(p.data(), p.data() + p.size());
}

std::optional<Distribution> aggregate_segments(const RbfnModel& model,
                                               const std::vector<FeatureVector>& segments) {
  if (segments.empty()) return std::nullopt;
  const Eigen::MatrixXd p = rbfn_predict_all(model, segments);
  const Eigen::VectorXd mean = p.colwise().mean().transpose();
  return Distribution(mean.data(), mean.data() + mean.size());
}

Distribution align_distribution(const Distribution& dist,
                                const std::vector<std::string>& from,
                                const std::vector<std::string>& to) {
  if (dist.size() != from.size()) throw ComputeError("distribution/label size mismatch");
  std::map<std::string, double> by_label;
  for (std::size_t i = 0; i < from.size(); ++i) by_label[from[i]] = dist[i];
  Distribution out(to.size(), 0.0);
  for (std::size_t i = 0; i < to.size(); ++i) {
    if (auto it = by_label.find(to[i]); it != by_label.end()) out[i] = it->second;
  }
  return out;
}

void FusionWeights::validate() const {
  for (double w : {w_fix, w_sac, w_blink}) {
    if (!std::isfinite(w) || w < 0.0) throw UsageError("fusion weights must be non-negative");
  }
  if (!(w_fix > 0.0 || w_sac > 0.0 || w_blink > 0.0)) {
    throw UsageError("at least one fusion weight must be positive");
  }
}

FusionResult fuse(const std::optional<Distribution>& p_fix,
                  const std::optional<Distribution>& p_sac,
                  const std::optional<Distribution>& p_blink, const FusionWeights& w) {
  w.validate();
  const std::pair<const std::optional<Distribution>*, double> parts[] = {
      {&p_fix, w.w_fix}, {&p_sac, w.w_sac}, {&p_blink, w.w_blink}};
  FusionResult r;
  bool any = false;
  for (const auto& [p, weight] : parts) {
    if (!p->has_value()) continue;
    const Distribution& d = **p;
    if (!any) {
      r.p_final.assign(d.size(), 0.0);
      any = true;
    } else if (d.size() != r.p_final.size()) {
      throw ComputeError("fused distributions disagree on class count");
    }
    for (std::size_t i = 0; i < d.size(); ++i) r.p_final[i] += d[i] * weight;
  }
  if (!any) throw ComputeError("fusion needs at least one classifier");
  r.predicted = static_cast<std::size_t>(
      std::max_element(r.p_final.begin(), r.p_final.end()) - r.p_final.begin());
  return r;
}

void save_model(const RbfnModel& model, std::ostream& out) {
  out << kModelMagic << ' ' << kModelVersion << '\n';
  if (model.schema.is_blink()) {
    out << "schema blink\n";
  } else {
    out << "schema order " << model.schema.derivative_order() << '\n';
  }
  out << "seed " << model.seed << '\n';
  out << "classes " << model.class_labels.size() << '\n';
  for (const auto& label : model.class_labels) {
    if (label.empty() || label.find_first_of(" \t\r\n") != std::string::npos) {
      throw DataError("class label '" + label + "' cannot be serialised");
    }
    out << label << '\n';
  }
  out << "centers " << model.centers.rows() << ' ' << model.centers.cols() << '\n';
  for (Eigen::Index r = 0; r < model.centers.rows(); ++r) {
    for (Eigen::Index c = 0; c < model.centers.cols(); ++c) {
      if (c) out << ' ';
      write_hex(out, model.centers(r, c));
    }
    out << '\n';
  }
  out << "widths " << model.widths.size() << '\n';
  for (std::size_t i = 0; i < model.widths.size(); ++i) {
    if (i) out << ' ';
    write_hex(out, model.widths[i]);
  }
  out << '\n';
  out << "weights " << model.output_weights.rows() << ' ' << model.output_weights.cols()
      << '\n';
  for (Eigen::Index r = 0; r < model.output_weights.rows(); ++r) {
    for (Eigen::Index c = 0; c < model.output_weights.cols(); ++c) {
      if (c) out << ' ';
      write_hex(out, model.output_weights(r, c));
    }
    out << '\n';
  }
  out << "end\n";
}

RbfnModel load_model(std::istream& in) {
  expect(in, kModelMagic);
  int version = 0;
  if (!(in >> version) || version != kModelVersion) {
    throw DataError("unsupported model version");
  }
  RbfnModel m;
  expect(in, "schema");
  std::string kind;
  in >> kind;
  if (kind == "blink") {
    m.schema = FeatureSchema::blink();
  } else if (kind == "order") {
    int order = -1;
    in >> order;
    m.schema = FeatureSchema::for_order(order);
  } else {
    throw DataError("model file: unknown schema '" + kind + "'");
  }
  expect(in, "seed");
  in >> m.seed;
  expect(in, "classes");
  std::size_t classes = 0;
  in >> classes;
  m.class_labels.resize(classes);
  for (auto& label : m.class_labels) in >> label;
  expect(in, "centers");
  Eigen::Index k = 0, d = 0;
  in >> k >> d;
  m.centers.resize(k, d);
  for (Eigen::Index r = 0; r < k; ++r)
    for (Eigen::Index c = 0; c < d; ++c) m.centers(r, c) = read_hex(in);
  expect(in, "widths");
  std::size_t nw = 0;
  in >> nw;
  m.widths.resize(nw);
  for (auto& w : m.widths) w = read_hex(in);
  expect(in, "weights");
  Eigen::Index wr = 0, wc = 0;
  in >> wr >> wc;
  m.output_weights.resize(wr, wc);
  for (Eigen::Index r = 0; r < wr; ++r)
    for (Eigen::Index c = 0; c < wc; ++c) m.output_weights(r, c) = read_hex(in);
  expect(in, "end");
  if (!in) throw DataError("model file truncated");
  if (static_cast<Eigen::Index>(nw) != k || wr != k + 1 ||
      static_cast<std::size_t>(wc) != classes) {
    throw DataError("model file: inconsistent dimensions");
  }
  return m;
}

}  // namespace eyeid
