#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <string_view>
#include <vector>

#include "gml/matrix.hpp"

namespace gml {

enum class Activation { Linear, Relu, Sigmoid, Tanh };

std::string_view to_string(Activation act);
Activation parse_activation(std::string_view name);

enum class OpKind {
  Constant,
  Parameter,
  MatMul,
  Add,
  AddBiasRow,
  ConcatCols,
  RowMeanPool,
  Activation,
  SoftmaxRows,
  MseLoss,
  CrossEntropyLoss,
  ScaleAdd,
};

std::string_view to_string(OpKind kind);

struct OpAttrs {
  Activation activation = Activation::Linear;
  double alpha = 1.0;  // ScaleAdd coefficient
};

using NodeId = std::size_t;

/// Reverse-mode differentiation tape over dense matrices.
///
/// Forward values are computed eagerly when a node is recorded; inputs must
/// already be on the tape, so node ids are a topological order. A Tape is
/// single-owner: record and backward are not thread-safe, distinct tapes are
/// independent.
///
/// Op semantics (shapes checked at record time, ShapeError on mismatch):
///   MatMul(a, b)              a·b
///   Add(a, b)                 a + b, same shape
///   AddBiasRow(x, b)          x + 1·b for a 1×cols(x) row b
///   ConcatCols(x1..xk)        [x1 | … | xk], equal row counts
///   RowMeanPool(x)            1×cols mean over rows
///   Activation(x)             elementwise σ (relu'(0) = 0)
///   SoftmaxRows(x)            row-wise softmax
///   MseLoss(p, t)             mean((p − t)²), 1×1
///   CrossEntropyLoss(z, t)    −Σₖ tₖ·log(meanᵢ softmax(zᵢ)ₖ) for N×c logits z and
///                             a 1×c target distribution t; 1×1. With N = 1 this is
///                             the usual softmax cross-entropy. No gradient flows to t.
///   ScaleAdd(x, y)            alpha·x + y
class Tape {
 public:
  NodeId constant(Matrix value);
  NodeId parameter(Matrix value);

  NodeId record(OpKind kind, std::span<const NodeId> inputs, OpAttrs attrs = {});
  NodeId record(OpKind kind, std::initializer_list<NodeId> inputs, OpAttrs attrs = {}) {
    return record(kind, std::span<const NodeId>(inputs.begin(), inputs.size()), attrs);
  }

  NodeId matmul(NodeId a, NodeId b) { return record(OpKind::MatMul, {a, b}); }
  NodeId add(NodeId a, NodeId b) { return record(OpKind::Add, {a, b}); }
  NodeId add_bias_row(NodeId x, NodeId b) { return record(OpKind::AddBiasRow, {x, b}); }
  NodeId concat_cols(std::span<const NodeId> xs) { return record(OpKind::ConcatCols, xs); }
  NodeId row_mean_pool(NodeId x) { return record(OpKind::RowMeanPool, {x}); }
  NodeId activation(NodeId x, Activation act) {
    return record(OpKind::Activation, {x}, {.activation = act});
  }
  NodeId softmax_rows(NodeId x) { return record(OpKind::SoftmaxRows, {x}); }
  NodeId mse_loss(NodeId pred, NodeId target) { return record(OpKind::MseLoss, {pred, target}); }
  NodeId cross_entropy_loss(NodeId logits, NodeId target) {
    return record(OpKind::CrossEntropyLoss, {logits, target});
  }
  NodeId scale_add(double alpha, NodeId x, NodeId y) {
    return record(OpKind::ScaleAdd, {x, y}, {.alpha = alpha});
  }

  std::size_t size() const noexcept { return nodes_.size(); }
  OpKind kind(NodeId id) const { return nodes_.at(id).kind; }
  const Matrix& value(NodeId id) const { return nodes_.at(id).value; }
  // Gradient from the most recent backward; empty for nodes off the parameter paths.
  const Matrix& grad(NodeId id) const { return nodes_.at(id).grad; }
  std::span<const NodeId> parameters() const noexcept { return params_; }

  // Replaces a leaf (Constant or Parameter) value of the same shape; call replay() afterwards.
  void set_value(NodeId id, Matrix value);
  // Recomputes every non-leaf value in tape order.
  void replay();

  /// Gradients of a 1×1 loss with respect to each parameter, in parameters()
  /// order. Parameters without a path to the loss get a zero matrix.
  std::vector<Matrix> backward(NodeId loss);

 private:
  struct Node {
    OpKind kind;
    OpAttrs attrs;
    std::vector<NodeId> inputs;
    Matrix value;
    Matrix grad;
    bool needs_grad = false;
  };

  void check_shapes(const Node& node) const;
  void forward(Node& node) const;
  void backward_node(const Node& node);
  Matrix& grad_slot(NodeId id);

  std::vector<Node> nodes_;
  std::vector<NodeId> params_;
};

/// Largest relative error between backward() and central differences over
/// every parameter entry: |g_ad − g_fd| / max(1e-8, |g_ad| + |g_fd|).
/// Leaves parameter values unchanged.
double grad_check(Tape& tape, NodeId loss, double step);

double activate(Activation act, double x);

}  // namespace gml
