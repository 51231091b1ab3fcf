#include "core/dualflow.hpp"

#include <cmath>
#include <cstring>
#include <functional>
#include <random>
#include <sstream>

namespace cluedex::dualflow {

namespace {

// Row-wise softmax, max-shifted for stability.
Mat row_softmax(const Mat& z) {
  Mat out(z.rows(), z.cols());
  for (Eigen::Index i = 0; i < z.rows(); ++i) {
    const double m = z.row(i).maxCoeff();
    Eigen::ArrayXd e = (z.row(i).array() - m).exp();
    out.row(i) = e / e.sum();
  }
  return out;
}

// Backward through Z -> softmax rows -> S given dS: dZ = S .* (dS - rowsum(dS .* S)).
Mat row_softmax_backward(const Mat& s, const Mat& ds) {
  Mat dz(s.rows(), s.cols());
  for (Eigen::Index i = 0; i < s.rows(); ++i) {
    const double dot = s.row(i).dot(ds.row(i));
    dz.row(i) = s.row(i).array() * (ds.row(i).array() - dot);
  }
  return dz;
}

Mat random_mat(Eigen::Index rows, Eigen::Index cols, double scale, std::mt19937_64& rng) {
  std::normal_distribution<double> dist(0.0, scale);
  Mat m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = dist(rng);
  return m;
}

struct AttentionCache {
  Mat q, k, v, s, out;
};

AttentionCache attention_forward(const Mat& q, const Mat& k, const Mat& v) {
  AttentionCache c;
  c.q = q;
  c.k = k;
  c.v = v;
  const double inv_sqrt_d = 1.0 / std::sqrt(static_cast<double>(q.cols()));
  c.s = row_softmax(q * k.transpose() * inv_sqrt_d);
  c.out = c.s * v;
  return c;
}

struct AttentionGrads {
  Mat dq, dk, dv;
};

AttentionGrads attention_backward(const AttentionCache& c, const Mat& dout) {
  const double inv_sqrt_d = 1.0 / std::sqrt(static_cast<double>(c.q.cols()));
  AttentionGrads g;
  g.dv = c.s.transpose() * dout;
  const Mat ds = dout * c.v.transpose();
  const Mat dz = row_softmax_backward(c.s, ds);
  g.dq = dz * c.k * inv_sqrt_d;
  g.dk = dz.transpose() * c.q * inv_sqrt_d;
  return g;
}

struct LayerCache {
  Mat x_p;  // effective prefix fed to this layer
  AttentionCache prefix_att, self_att;
  Mat h_in, h_out;
};

struct ForwardCache {
  Mat h_r;  // projected object features, unpadded
  std::vector<LayerCache> layers;
  Mat logits;  // n x vocab
  double loss = 0.0;
};

ForwardCache toy_forward_cached(const ToyModel& model, const ToyBatch& batch) {
  if (model.x_pr.empty() || model.x_pr.size() != model.layers.size())
    throw_error(ErrorCode::kInvalidArgument, "model layer/prefix count mismatch");
  if (batch.targets.size() != batch.predicted.size() ||
      static_cast<Eigen::Index>(batch.targets.size()) != batch.h_i0.rows())
    throw_error(ErrorCode::kInvalidArgument, "batch target/mask/hidden length mismatch");

  ForwardCache cache;
  cache.h_r = batch.x_r * model.w_proj;
  const double sigma = model.sigma();

  Mat h = batch.h_i0;
  for (std::size_t li = 0; li < model.layers.size(); ++li) {
    LayerCache lc;
    lc.h_in = h;
    lc.x_p = object_prefix(model.x_pr[li], pad_rows(cache.h_r, model.x_pr[li].rows()));
    const AttentionParams& p = model.layers[li];
    p.validate(h.cols());
    const Mat q_h = h * p.w_q;
    lc.prefix_att = attention_forward(q_h, lc.x_p * p.w_k, lc.x_p * p.w_v);
    lc.self_att = attention_forward(q_h, h * p.w_k, h * p.w_v);
    lc.h_out = sigma * lc.prefix_att.out + lc.self_att.out;
    h = lc.h_out;
    cache.layers.push_back(std::move(lc));
  }

  cache.logits = h * model.w_out;
  std::vector<Vec> per_pos(cache.logits.rows());
  for (Eigen::Index i = 0; i < cache.logits.rows(); ++i) per_pos[i] = cache.logits.row(i);
  cache.loss = autoregressive_loss(per_pos, batch.targets, batch.predicted);
  return cache;
}

double rel_err(double analytic, double numeric) {
  return std::abs(analytic - numeric) /
         std::max({std::abs(analytic), std::abs(numeric), 1.0});
}

// Central finite difference of the toy loss along one scalar coordinate.
double numeric_grad(ToyModel& model, const ToyBatch& batch, double* coord) {
  constexpr double kStep = 1e-4;
  const double saved = *coord;
  *coord = saved + kStep;
  const double up = toy_forward(model, batch);
  *coord = saved - kStep;
  const double down = toy_forward(model, batch);
  *coord = saved;
  return (up - down) / (2.0 * kStep);
}

GradCheck check_matrix(const std::string& name, ToyModel& model, const ToyBatch& batch,
                       Mat& param, const Mat& analytic) {
  GradCheck c{name, 0.0, false};
  for (Eigen::Index i = 0; i < param.rows(); ++i) {
    for (Eigen::Index j = 0; j < param.cols(); ++j) {
      const double num = numeric_grad(model, batch, &param(i, j));
      c.max_rel_err = std::max(c.max_rel_err, rel_err(analytic(i, j), num));
    }
  }
  c.pass = c.max_rel_err < 1e-4;
  return c;
}

}  // namespace

Mat object_prefix(const Mat& x_pr, const Mat& h_r_padded) {
  if (x_pr.rows() != h_r_padded.rows() || x_pr.cols() != h_r_padded.cols())
    throw_error(ErrorCode::kInvalidArgument, "prefix/object feature shape mismatch");
  return x_pr + h_r_padded;
}

Mat pad_rows(const Mat& h_r, Eigen::Index rows) {
  if (h_r.rows() > rows)
    throw_error(ErrorCode::kInvalidArgument, "more object rows than prefix slots");
  Mat out = Mat::Zero(rows, h_r.cols());
  out.topRows(h_r.rows()) = h_r;
  return out;
}

Mat attention(const Mat& q, const Mat& k, const Mat& v) {
  if (q.cols() == 0) throw_error(ErrorCode::kInvalidArgument, "zero-width attention");
  if (q.cols() != k.cols() || k.rows() != v.rows())
    throw_error(ErrorCode::kInvalidArgument, "attention shape mismatch");
  return attention_forward(q, k, v).out;
}

void AttentionParams::validate(Eigen::Index d) const {
  for (const Mat* m : {&w_q, &w_k, &w_v})
    if (m->rows() != d || m->cols() != d)
      throw_error(ErrorCode::kInvalidArgument, "attention projection must be d x d");
}

Mat dual_flow_attention(const Mat& h_i, const Mat& x_p, const AttentionParams& params,
                        double sigma) {
  params.validate(h_i.cols());
  if (x_p.cols() != h_i.cols())
    throw_error(ErrorCode::kInvalidArgument, "prefix width must match hidden width");
  const Mat q_h = h_i * params.w_q;
  return sigma * attention(q_h, x_p * params.w_k, x_p * params.w_v) +
         attention(q_h, h_i * params.w_k, h_i * params.w_v);
}

Vec align_project(const Vec& h_cls, const Mat& h_r, const Mat& w, const Vec& b) {
  const Eigen::Index in_dim = h_cls.size() + h_r.size();
  if (w.cols() != in_dim)
    throw_error(ErrorCode::kInvalidArgument, "alignment weight width mismatch");
  if (w.rows() != b.size())
    throw_error(ErrorCode::kInvalidArgument, "alignment bias size mismatch");
  Vec joint(in_dim);
  joint.head(h_cls.size()) = h_cls;
  Eigen::Index at = h_cls.size();
  for (Eigen::Index i = 0; i < h_r.rows(); ++i) {
    joint.segment(at, h_r.cols()) = h_r.row(i);
    at += h_r.cols();
  }
  return w * joint + b;
}

double autoregressive_loss(const std::vector<Vec>& logits, const std::vector<int>& targets,
                           const std::vector<bool>& predicted) {
  if (logits.size() != targets.size() || logits.size() != predicted.size())
    throw_error(ErrorCode::kInvalidArgument, "loss input length mismatch");
  double loss = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    if (!predicted[i]) continue;
    const Vec& z = logits[i];
    if (targets[i] < 0 || targets[i] >= z.size())
      throw_error(ErrorCode::kInvalidArgument, "target token outside logit range");
    const double m = z.maxCoeff();
    const double lse = m + std::log((z.array() - m).exp().sum());
    loss += lse - z(targets[i]);
  }
  return loss;
}

ToyModel ToyModel::random(Eigen::Index layers, Eigen::Index prefix_len, Eigen::Index d,
                          Eigen::Index obj_dim, Eigen::Index vocab, std::uint64_t seed) {
  if (layers < 1 || prefix_len < 1 || d < 1 || obj_dim < 1 || vocab < 2)
    throw_error(ErrorCode::kInvalidArgument, "toy model dimensions must be positive");
  std::mt19937_64 rng(seed);
  ToyModel m;
  const double scale = 1.0 / std::sqrt(static_cast<double>(d));
  for (Eigen::Index li = 0; li < layers; ++li) {
    m.x_pr.push_back(random_mat(prefix_len, d, scale, rng));
    m.layers.push_back({random_mat(d, d, scale, rng), random_mat(d, d, scale, rng),
                        random_mat(d, d, scale, rng)});
  }
  m.w_proj = random_mat(obj_dim, d, 1.0 / std::sqrt(static_cast<double>(obj_dim)), rng);
  m.w_out = random_mat(d, vocab, scale, rng);
  m.gate_raw = 0.25;
  return m;
}

ToyBatch ToyBatch::random(const ToyModel& model, Eigen::Index n, Eigen::Index r,
                          std::uint64_t seed) {
  if (n < 2) throw_error(ErrorCode::kInvalidArgument, "batch needs at least two positions");
  if (r < 1 || r > model.x_pr.front().rows())
    throw_error(ErrorCode::kInvalidArgument, "object rows must fit the prefix");
  std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ULL);
  ToyBatch b;
  const Eigen::Index d = model.x_pr.front().cols();
  b.h_i0 = random_mat(n, d, 1.0, rng);
  b.x_r = random_mat(r, model.w_proj.rows(), 1.0, rng);
  std::uniform_int_distribution<int> tok(0, static_cast<int>(model.w_out.cols()) - 1);
  for (Eigen::Index i = 0; i < n; ++i) {
    b.targets.push_back(tok(rng));
    // First half is instruction region, masked out of the loss.
    b.predicted.push_back(i >= n / 2);
  }
  return b;
}

double toy_forward(const ToyModel& model, const ToyBatch& batch) {
  return toy_forward_cached(model, batch).loss;
}

ToyGrads toy_backward(const ToyModel& model, const ToyBatch& batch) {
  const ForwardCache cache = toy_forward_cached(model, batch);
  const double sigma = model.sigma();

  ToyGrads g;
  g.x_pr.assign(model.x_pr.size(), Mat());
  g.layers.assign(model.layers.size(), AttentionParams());
  g.w_proj = Mat::Zero(model.w_proj.rows(), model.w_proj.cols());

  // d loss / d logits: softmax minus one-hot on predicted rows, zero elsewhere.
  Mat dlogits = Mat::Zero(cache.logits.rows(), cache.logits.cols());
  for (Eigen::Index i = 0; i < cache.logits.rows(); ++i) {
    if (!batch.predicted[i]) continue;
    const Vec z = cache.logits.row(i);
    const double m = z.maxCoeff();
    Eigen::ArrayXd e = (z.array() - m).exp();
    dlogits.row(i) = (e / e.sum()).matrix().transpose();
    dlogits(i, batch.targets[i]) -= 1.0;
  }

  const Mat& h_last = cache.layers.back().h_out;
  g.w_out = h_last.transpose() * dlogits;
  Mat dh = dlogits * model.w_out.transpose();

  double dsigma = 0.0;
  Mat dh_r = Mat::Zero(cache.h_r.rows(), cache.h_r.cols());

  for (std::size_t li = model.layers.size(); li-- > 0;) {
    const LayerCache& lc = cache.layers[li];
    const AttentionParams& p = model.layers[li];

    dsigma += (dh.array() * lc.prefix_att.out.array()).sum();
    const AttentionGrads ga = attention_backward(lc.prefix_att, sigma * dh);
    const AttentionGrads gb = attention_backward(lc.self_att, dh);

    const Mat dq_h = ga.dq + gb.dq;
    g.layers[li].w_q = lc.h_in.transpose() * dq_h;
    g.layers[li].w_k = lc.x_p.transpose() * ga.dk + lc.h_in.transpose() * gb.dk;
    g.layers[li].w_v = lc.x_p.transpose() * ga.dv + lc.h_in.transpose() * gb.dv;

    const Mat dx_p = ga.dk * p.w_k.transpose() + ga.dv * p.w_v.transpose();
    g.x_pr[li] = dx_p;
    dh_r += dx_p.topRows(cache.h_r.rows());

    dh = dq_h * p.w_q.transpose() + gb.dk * p.w_k.transpose() + gb.dv * p.w_v.transpose();
  }

  g.w_proj = batch.x_r.transpose() * dh_r;
  g.gate_raw = dsigma * sigma * (1.0 - sigma);
  return g;
}

VerifyReport verify(std::uint64_t seed) {
  VerifyReport report;

  // Small dims keep the full coordinate sweep of finite differences cheap.
  ToyModel model = ToyModel::random(/*layers=*/2, /*prefix_len=*/3, /*d=*/4,
                                    /*obj_dim=*/5, /*vocab=*/6, seed);
  ToyBatch batch = ToyBatch::random(model, /*n=*/4, /*r=*/2, seed + 1);
  const ToyGrads grads = toy_backward(model, batch);

  for (std::size_t li = 0; li < model.x_pr.size(); ++li) {
    const std::string tag = "layer" + std::to_string(li);
    report.checks.push_back(
        check_matrix("prefix_" + tag, model, batch, model.x_pr[li], grads.x_pr[li]));
    report.checks.push_back(
        check_matrix("w_q_" + tag, model, batch, model.layers[li].w_q, grads.layers[li].w_q));
    report.checks.push_back(
        check_matrix("w_k_" + tag, model, batch, model.layers[li].w_k, grads.layers[li].w_k));
    report.checks.push_back(
        check_matrix("w_v_" + tag, model, batch, model.layers[li].w_v, grads.layers[li].w_v));
  }
  report.checks.push_back(check_matrix("w_proj", model, batch, model.w_proj, grads.w_proj));
  report.checks.push_back(check_matrix("w_out", model, batch, model.w_out, grads.w_out));
  {
    GradCheck c{"gate", 0.0, false};
    const double num = numeric_grad(model, batch, &model.gate_raw);
    c.max_rel_err = rel_err(grads.gate_raw, num);
    c.pass = c.max_rel_err < 1e-4;
    report.checks.push_back(c);
  }

  // Alignment head: loss = 0.5 ||f||^2, so df = f and parameter gradients
  // follow from the single linear map. Checked coordinate by coordinate.
  {
    std::mt19937_64 rng(seed + 2);
    Vec h_cls = random_mat(4, 1, 1.0, rng).col(0);
    Mat h_r = random_mat(2, 3, 1.0, rng);
    Mat w = random_mat(5, 4 + 6, 0.5, rng);
    Vec b = random_mat(5, 1, 0.5, rng).col(0);
    const auto loss = [&] {
      const Vec f = align_project(h_cls, h_r, w, b);
      return 0.5 * f.squaredNorm();
    };
    const Vec f0 = align_project(h_cls, h_r, w, b);
    Vec joint(h_cls.size() + h_r.size());
    joint.head(h_cls.size()) = h_cls;
    for (Eigen::Index i = 0; i < h_r.rows(); ++i)
      joint.segment(h_cls.size() + i * h_r.cols(), h_r.cols()) = h_r.row(i);
    const Mat dw = f0 * joint.transpose();
    const Vec db = f0;

    GradCheck c{"align_w", 0.0, false};
    constexpr double kStep = 1e-4;
    for (Eigen::Index i = 0; i < w.rows(); ++i) {
      for (Eigen::Index j = 0; j < w.cols(); ++j) {
        const double saved = w(i, j);
        w(i, j) = saved + kStep;
        const double up = loss();
        w(i, j) = saved - kStep;
        const double down = loss();
        w(i, j) = saved;
        c.max_rel_err = std::max(c.max_rel_err, rel_err(dw(i, j), (up - down) / (2 * kStep)));
      }
    }
    c.pass = c.max_rel_err < 1e-4;
    report.checks.push_back(c);

    GradCheck cb{"align_b", 0.0, false};
    for (Eigen::Index i = 0; i < b.size(); ++i) {
      const double saved = b(i);
      b(i) = saved + kStep;
      const double up = loss();
      b(i) = saved - kStep;
      const double down = loss();
      b(i) = saved;
      cb.max_rel_err = std::max(cb.max_rel_err, rel_err(db(i), (up - down) / (2 * kStep)));
    }
    cb.pass = cb.max_rel_err < 1e-4;
    report.checks.push_back(cb);
  }

  // sigma = 0 must reduce the gated form to exact self-attention.
  {
    std::mt19937_64 rng(seed + 3);
    const Mat h = random_mat(4, 4, 1.0, rng);
    const Mat x_p = random_mat(3, 4, 1.0, rng);
    AttentionParams p{random_mat(4, 4, 0.5, rng), random_mat(4, 4, 0.5, rng),
                      random_mat(4, 4, 0.5, rng)};
    const Mat gated = dual_flow_attention(h, x_p, p, 0.0);
    const Mat plain = attention(h * p.w_q, h * p.w_k, h * p.w_v);
    report.sigma_zero_gap = (gated - plain).cwiseAbs().maxCoeff();
  }

  // Short training run: loss must drop and frozen tensors must not move.
  {
    ToyModel train_model =
        ToyModel::random(/*layers=*/2, /*prefix_len=*/4, /*d=*/8, /*obj_dim=*/6,
                         /*vocab=*/12, seed + 4);
    ToyBatch train_batch = ToyBatch::random(train_model, /*n=*/6, /*r=*/3, seed + 5);
    const TrainResult tr = toy_train(train_model, train_batch, 200, 0.05);
    report.loss_step0 = tr.losses.front();
    report.loss_step200 = tr.losses.back();
    report.frozen_unchanged = tr.frozen_unchanged;
  }

  report.all_pass = report.sigma_zero_gap == 0.0 && report.frozen_unchanged &&
                    report.loss_step200 < 0.5 * report.loss_step0;
  for (const GradCheck& c : report.checks) report.all_pass = report.all_pass && c.pass;
  return report;
}

TrainResult toy_train(ToyModel& model, const ToyBatch& batch, std::uint32_t steps,
                      double learning_rate) {
  if (steps == 0) throw_error(ErrorCode::kInvalidArgument, "training needs at least one step");

  // Byte-exact snapshot of every frozen tensor.
  const auto frozen_bytes = [&model] {
    std::string bytes;
    const auto append = [&bytes](const Mat& m) {
      bytes.append(reinterpret_cast<const char*>(m.data()), m.size() * sizeof(double));
    };
    for (const AttentionParams& p : model.layers) {
      append(p.w_q);
      append(p.w_k);
      append(p.w_v);
    }
    append(model.w_out);
    return bytes;
  };
  const std::string before = frozen_bytes();

  TrainResult result;
  result.losses.push_back(toy_forward(model, batch));
  for (std::uint32_t step = 0; step < steps; ++step) {
    const ToyGrads g = toy_backward(model, batch);
    for (std::size_t li = 0; li < model.x_pr.size(); ++li)
      model.x_pr[li] -= learning_rate * g.x_pr[li];
    model.w_proj -= learning_rate * g.w_proj;
    model.gate_raw -= learning_rate * g.gate_raw;
    const double loss = toy_forward(model, batch);
    if (!std::isfinite(loss))
      throw_error(ErrorCode::kRuntime,
                  "training diverged at step " + std::to_string(step + 1));
    result.losses.push_back(loss);
  }
  result.frozen_unchanged = frozen_bytes() == before;
  return result;
}

std::string VerifyReport::to_json() const {
  std::ostringstream os;
  os.precision(17);
  os << "{\n  \"checks\": [\n";
  for (std::size_t i = 0; i < checks.size(); ++i) {
    os << "    {\"name\": \"" << checks[i].name << "\", \"max_rel_err\": "
       << checks[i].max_rel_err << ", \"pass\": " << (checks[i].pass ? "true" : "false")
       << "}" << (i + 1 < checks.size() ? "," : "") << "\n";
  }
  os << "  ],\n";
  os << "  \"sigma_zero_gap\": " << sigma_zero_gap << ",\n";
  os << "  \"frozen_unchanged\": " << (frozen_unchanged ? "true" : "false") << ",\n";
  os << "  \"loss_step0\": " << loss_step0 << ",\n";
  os << "  \"loss_step200\": " << loss_step200 << ",\n";
  os << "  \"all_pass\": " << (all_pass ? "true" : "false") << "\n}";
  return os.str();
}

std::string VerifyReport::to_table() const {
  std::ostringstream os;
  for (const GradCheck& c : checks) {
    os << (c.pass ? "PASS" : "FAIL") << "  " << c.name << "  max_rel_err="
       << c.max_rel_err << "\n";
  }
  os << (sigma_zero_gap == 0.0 ? "PASS" : "FAIL")
     << "  gate_zero_reduces_to_self_attention  gap=" << sigma_zero_gap << "\n";
  os << (frozen_unchanged ? "PASS" : "FAIL") << "  frozen_tensors_unchanged\n";
  os << (loss_step200 < 0.5 * loss_step0 ? "PASS" : "FAIL") << "  training_loss_halves  "
     << loss_step0 << " -> " << loss_step200 << "\n";
  os << (all_pass ? "PASS" : "FAIL") << "  overall\n";
  return os.str();
}

}  // namespace cluedex::dualflow
