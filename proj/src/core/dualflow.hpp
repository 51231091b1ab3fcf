#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "core/common.hpp"

namespace cluedex::dualflow {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;

// Object-aware prefix: elementwise sum of the learnable prefix prompts and
// the (already zero-padded) projected object features.
Mat object_prefix(const Mat& x_pr, const Mat& h_r_padded);

// Zero-pad projected object rows to the prefix height.
Mat pad_rows(const Mat& h_r, Eigen::Index rows);

// Att(Q, K, V) = softmax(Q K^T / sqrt(d)) V, softmax per query row.
Mat attention(const Mat& q, const Mat& k, const Mat& v);

struct AttentionParams {
  Mat w_q, w_k, w_v;  // d x d

  void validate(Eigen::Index d) const;
};

// Gated two-stream attention: queries from the hidden states attend to the
// prefix and to the hidden states independently; the prefix term is scaled
// by the gate. sigma = 0 reduces exactly to vanilla self-attention.
Mat dual_flow_attention(const Mat& h_i, const Mat& x_p, const AttentionParams& params,
                        double sigma);

// Single linear map over [h_cls ; vec(H_R)].
Vec align_project(const Vec& h_cls, const Mat& h_r, const Mat& w, const Vec& b);

// Negative log-likelihood of the target tokens under per-position logits;
// positions with predicted[i] == false (instruction region) contribute 0.
double autoregressive_loss(const std::vector<Vec>& logits, const std::vector<int>& targets,
                           const std::vector<bool>& predicted);

// Toy end-to-end model: object features are projected and added into
// per-layer prefixes of a frozen attention stack; hidden states map to
// vocabulary logits. Learnable: prefixes, the object projection, the gate.
struct ToyModel {
  // learnable
  std::vector<Mat> x_pr;  // per layer, l x d (not shared across layers)
  Mat w_proj;             // obj_dim x d
  double gate_raw = 0.0;  // sigma = sigmoid(gate_raw)
  // frozen
  std::vector<AttentionParams> layers;
  Mat w_out;  // d x vocab

  double sigma() const { return 1.0 / (1.0 + std::exp(-gate_raw)); }
  static ToyModel random(Eigen::Index layers, Eigen::Index prefix_len, Eigen::Index d,
                         Eigen::Index obj_dim, Eigen::Index vocab, std::uint64_t seed);
};

struct ToyBatch {
  Mat h_i0;  // visual-token hidden states, n x d
  Mat x_r;   // object features, r x obj_dim (r <= prefix_len)
  std::vector<int> targets;
  std::vector<bool> predicted;  // false = instruction region

  static ToyBatch random(const ToyModel& model, Eigen::Index n, Eigen::Index r,
                         std::uint64_t seed);
};

struct ToyGrads {
  std::vector<Mat> x_pr;
  Mat w_proj;
  double gate_raw = 0.0;
  // frozen-parameter gradients, computed for checking only
  std::vector<AttentionParams> layers;
  Mat w_out;
};

double toy_forward(const ToyModel& model, const ToyBatch& batch);
ToyGrads toy_backward(const ToyModel& model, const ToyBatch& batch);

struct GradCheck {
  std::string name;
  double max_rel_err = 0.0;
  bool pass = false;
};

struct VerifyReport {
  std::vector<GradCheck> checks;
  double sigma_zero_gap = 0.0;  // max |dual_flow(sigma=0) - self_attention|
  bool frozen_unchanged = false;
  double loss_step0 = 0.0;
  double loss_step200 = 0.0;
  bool all_pass = false;

  std::string to_json() const;
  std::string to_table() const;
};

// Central finite differences, step 1e-4; relative error uses
// max(|analytic|, |numeric|, 1) as the denominator.
VerifyReport verify(std::uint64_t seed = 7);

struct TrainResult {
  std::vector<double> losses;
  bool frozen_unchanged = false;
};

// Plain gradient descent on the learnable tensors only; throws kRuntime
// with the step index if the loss turns NaN.
TrainResult toy_train(ToyModel& model, const ToyBatch& batch, std::uint32_t steps,
                      double learning_rate);

}  // namespace cluedex::dualflow
