#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "gml/autodiff.hpp"
#include "gml/graph.hpp"
#include "gml/graph_ops.hpp"
#include "gml/matrix.hpp"

namespace gml {

enum class Architecture { FcBaseline, PlainGcn, ModularGcn };
enum class HeadKind { RegressionAggregate, ClassifierMeanPool };

std::string_view to_string(Architecture arch);
std::string_view to_string(HeadKind head);
Architecture parse_architecture(std::string_view name);
HeadKind parse_head(std::string_view name);

/// Declarative network description.
///
/// PlainGcn stacks `layers` GCN layers with the single rule in `rules`.
/// ModularGcn stacks blocks that run one linear branch per rule (width
/// `branch_units`, defaulting to `units`), concatenate them and mix node-wise
/// to `units` with the activation. FcBaseline flattens the adjacency of a
/// `graph_size`-node graph into a sigmoid hidden layer of `units` and a linear
/// per-node output.
///
/// Heads: RegressionAggregate maps node features to one value per node;
/// ClassifierMeanPool produces pooled class probabilities. With `residual`
/// every layer output [h_L, …, h_1] feeds the head instead of h_L alone.
struct ModelSpec {
  Architecture arch = Architecture::PlainGcn;
  std::size_t layers = 1;
  std::size_t units = 1;
  std::size_t branch_units = 0;
  std::vector<PropagationRule> rules{PropagationRule::Adjacency};
  Activation activation = Activation::Linear;
  bool use_bias = true;
  bool residual = false;
  HeadKind head = HeadKind::RegressionAggregate;
  std::size_t classes = 2;
  std::size_t graph_size = 0;

  std::size_t branch_width() const noexcept { return branch_units == 0 ? units : branch_units; }

  // Throws ShapeError naming the violated constraint.
  void validate() const;
};

struct ParamShape {
  std::string name;
  std::size_t rows = 0;
  std::size_t cols = 0;
};

/// Parameter names and shapes, in tape order, derived from the spec alone.
std::vector<ParamShape> param_layout(const ModelSpec& spec);
std::size_t parameter_count(const ModelSpec& spec);

struct NamedMatrix {
  std::string name;
  Matrix value;
};

struct ModelParams {
  std::vector<NamedMatrix> entries;

  const Matrix& at(std::string_view name) const;
  Matrix& at(std::string_view name);
  std::size_t size() const noexcept { return entries.size(); }
};

/// Uniform in [−s, s], s = sqrt(6 / (fan_in + fan_out)) for weights; zero biases.
ModelParams init_params(const ModelSpec& spec, std::uint64_t seed);

// Throws ShapeError if names or shapes differ from param_layout(spec).
void check_params(const ModelSpec& spec, const ModelParams& params);

/// Constant node features: an n×1 column of ones.
Matrix init_attributes(const Graph& g);
Matrix init_attributes(std::size_t n);

/// σ(f(A)·h·W + b); the bias row is broadcast over nodes.
NodeId gcn_layer(Tape& tape, NodeId f_a, NodeId h, NodeId w, std::optional<NodeId> b,
                 Activation act);
NodeId gcn_layer(Tape& tape, const Matrix& f_a, NodeId h, NodeId w, std::optional<NodeId> b,
                 Activation act);

struct BlockParams {
  std::vector<NodeId> branch_weights;  // one per rule, in rule order
  NodeId mix_weight = 0;
  std::optional<NodeId> mix_bias;
};

/// One modular block: branches f_r(A)·h·W_r (linear), column concatenation,
/// then σ(concat·M + c). `operators[k]` is the node holding f(A) for rules[k].
NodeId modular_block(Tape& tape, std::span<const NodeId> operators, NodeId h,
                     const BlockParams& params, Activation act);
NodeId modular_block(Tape& tape, const Graph& g, NodeId h, std::span<const PropagationRule> rules,
                     const BlockParams& params, Activation act);

/// Y = σ(Z·W + b) with Z = [outputs[0] | outputs[1] | …]; callers pass the
/// layer outputs deepest first.
NodeId residual_head(Tape& tape, std::span<const NodeId> outputs, NodeId w,
                     std::optional<NodeId> b, Activation act);

/// Node-wise logits h·W + b (N×c).
NodeId classifier_logits(Tape& tape, NodeId h, NodeId w, NodeId b);
/// Row softmax of the logits, mean-pooled over nodes: 1×c probabilities.
NodeId classifier_head(Tape& tape, NodeId h, NodeId w, NodeId b);

/// Flattened adjacency (1×N²) → sigmoid hidden layer → linear 1×N output.
struct FcParams {
  NodeId hidden_w, hidden_b, out_w, out_b;
};
NodeId fc_baseline(Tape& tape, const Graph& g, const FcParams& params,
                   Activation act = Activation::Sigmoid);

/// GIN propagation σ([(1+ε)I + A]·h·W), written as ScaleAdd(1+ε, h, A·h)·W.
NodeId gin_layer(Tape& tape, NodeId adjacency, NodeId h, NodeId w, double eps, Activation act);

struct BuiltModel {
  Tape tape;
  NodeId output = 0;  // N×1 regression values (1×N for FcBaseline) or 1×c probabilities
  NodeId logits = 0;  // N×c classifier logits; equals output for regression heads
  std::vector<NodeId> param_nodes;
};

BuiltModel build_model(const ModelSpec& spec, const GraphOperators& ops, const ModelParams& params);
BuiltModel build_model(const ModelSpec& spec, const Graph& g, const ModelParams& params);

}  // namespace gml
