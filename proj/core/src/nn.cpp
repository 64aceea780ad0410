#include "gml/nn.hpp"

#include <algorithm>
#include <cmath>

#include "gml/error.hpp"
#include "gml/rng.hpp"

namespace gml {

std::string_view to_string(Architecture arch) {
  switch (arch) {
    case Architecture::FcBaseline:
      return "fc";
    case Architecture::PlainGcn:
      return "gcn";
    case Architecture::ModularGcn:
      return "modular";
  }
  return "?";
}

std::string_view to_string(HeadKind head) {
  return head == HeadKind::RegressionAggregate ? "regression" : "classifier";
}

Architecture parse_architecture(std::string_view name) {
  if (name == "fc") return Architecture::FcBaseline;
  if (name == "gcn") return Architecture::PlainGcn;
  if (name == "modular") return Architecture::ModularGcn;
  throw ParameterError("unknown architecture '" + std::string(name) + "'");
}

HeadKind parse_head(std::string_view name) {
  if (name == "regression") return HeadKind::RegressionAggregate;
  if (name == "classifier") return HeadKind::ClassifierMeanPool;
  throw ParameterError("unknown head '" + std::string(name) + "'");
}

void ModelSpec::validate() const {
  if (layers == 0) throw ShapeError("ModelSpec: at least one layer is required");
  if (units == 0) throw ShapeError("ModelSpec: units must be positive");
  if (head == HeadKind::ClassifierMeanPool && classes < 2) {
    throw ShapeError("ModelSpec: classifier head needs at least 2 classes");
  }
  switch (arch) {
    case Architecture::PlainGcn:
      if (rules.size() != 1) throw ShapeError("ModelSpec: plain GCN takes exactly one rule");
      break;
    case Architecture::ModularGcn: {
      if (rules.empty()) throw ShapeError("ModelSpec: modular GCN needs a non-empty rule set");
      auto sorted = rules;
      std::sort(sorted.begin(), sorted.end());
      if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
        throw ShapeError("ModelSpec: duplicate propagation rule");
      }
      break;
    }
    case Architecture::FcBaseline:
      if (graph_size == 0) throw ShapeError("ModelSpec: FC baseline needs graph_size");
      if (head != HeadKind::RegressionAggregate) {
        throw ShapeError("ModelSpec: FC baseline only supports the regression head");
      }
      break;
  }
}

std::vector<ParamShape> param_layout(const ModelSpec& spec) {
  spec.validate();
  std::vector<ParamShape> out;
  const std::size_t u = spec.units;

  if (spec.arch == Architecture::FcBaseline) {
    const std::size_t n = spec.graph_size;
    out.push_back({"fc.hidden.W", n * n, u});
    out.push_back({"fc.hidden.b", 1, u});
    out.push_back({"fc.out.W", u, n});
    out.push_back({"fc.out.b", 1, n});
    return out;
  }

  for (std::size_t l = 0; l < spec.layers; ++l) {
    const std::size_t d_in = l == 0 ? 1 : u;
    const std::string prefix = std::to_string(l);
    if (spec.arch == Architecture::PlainGcn) {
      out.push_back({"gcn." + prefix + ".W", d_in, u});
      if (spec.use_bias) out.push_back({"gcn." + prefix + ".b", 1, u});
    } else {
      const std::size_t bw = spec.branch_width();
      for (auto rule : spec.rules) {
        out.push_back({"block." + prefix + "." + std::string(to_string(rule)) + ".W", d_in, bw});
      }
      out.push_back({"block." + prefix + ".mix.W", spec.rules.size() * bw, u});
      if (spec.use_bias) out.push_back({"block." + prefix + ".mix.b", 1, u});
    }
  }

  const std::size_t head_in = spec.residual ? spec.layers * u : u;
  if (spec.head == HeadKind::RegressionAggregate) {
    out.push_back({"head.W", head_in, 1});
    if (spec.use_bias) out.push_back({"head.b", 1, 1});
  } else {
    if (spec.residual) {
      out.push_back({"residual.W", head_in, u});
      if (spec.use_bias) out.push_back({"residual.b", 1, u});
    }
    out.push_back({"head.W", u, spec.classes});
    out.push_back({"head.b", 1, spec.classes});
  }
  return out;
}

std::size_t parameter_count(const ModelSpec& spec) {
  std::size_t total = 0;
  for (const auto& p : param_layout(spec)) total += p.rows * p.cols;
  return total;
}

const Matrix& ModelParams::at(std::string_view name) const {
  for (const auto& e : entries)
    if (e.name == name) return e.value;
  throw ShapeError("ModelParams: no parameter named '" + std::string(name) + "'");
}

Matrix& ModelParams::at(std::string_view name) {
  return const_cast<Matrix&>(static_cast<const ModelParams&>(*this).at(name));
}

ModelParams init_params(const ModelSpec& spec, std::uint64_t seed) {
  Rng rng(seed);
  ModelParams params;
  for (const auto& shape : param_layout(spec)) {
    Matrix m(shape.rows, shape.cols);
    const bool is_bias = shape.name.ends_with(".b");
    if (!is_bias) {
      const double s = std::sqrt(6.0 / static_cast<double>(shape.rows + shape.cols));
      for (double& v : m.data()) v = rng.uniform(-s, s);
    }
    params.entries.push_back({shape.name, std::move(m)});
  }
  return params;
}

void check_params(const ModelSpec& spec, const ModelParams& params) {
  const auto layout = param_layout(spec);
  if (layout.size() != params.entries.size()) {
    throw ShapeError("parameters: expected " + std::to_string(layout.size()) + " matrices, got " +
                     std::to_string(params.entries.size()));
  }
  for (std::size_t k = 0; k < layout.size(); ++k) {
    const auto& e = params.entries[k];
    if (e.name != layout[k].name || e.value.rows() != layout[k].rows ||
        e.value.cols() != layout[k].cols) {
      throw ShapeError("parameters: expected " + layout[k].name + " " +
                       std::to_string(layout[k].rows) + "x" + std::to_string(layout[k].cols) +
                       ", got " + e.name + " " + e.value.shape_string());
    }
  }
}

Matrix init_attributes(std::size_t n) { return Matrix::ones(n, 1); }
Matrix init_attributes(const Graph& g) { return init_attributes(g.node_count()); }

NodeId gcn_layer(Tape& tape, NodeId f_a, NodeId h, NodeId w, std::optional<NodeId> b,
                 Activation act) {
  NodeId z = tape.matmul(tape.matmul(f_a, h), w);
  if (b) z = tape.add_bias_row(z, *b);
  return act == Activation::Linear ? z : tape.activation(z, act);
}

NodeId gcn_layer(Tape& tape, const Matrix& f_a, NodeId h, NodeId w, std::optional<NodeId> b,
                 Activation act) {
  return gcn_layer(tape, tape.constant(f_a), h, w, b, act);
}

NodeId modular_block(Tape& tape, std::span<const NodeId> operators, NodeId h,
                     const BlockParams& params, Activation act) {
  if (operators.empty() || operators.size() != params.branch_weights.size()) {
    throw ShapeError("modular_block: one branch weight per propagation rule is required");
  }
  std::vector<NodeId> branches;
  branches.reserve(operators.size());
  for (std::size_t k = 0; k < operators.size(); ++k) {
    branches.push_back(tape.matmul(tape.matmul(operators[k], h), params.branch_weights[k]));
  }
  const NodeId cat = branches.size() == 1 ? branches[0] : tape.concat_cols(branches);
  NodeId z = tape.matmul(cat, params.mix_weight);
  if (params.mix_bias) z = tape.add_bias_row(z, *params.mix_bias);
  return act == Activation::Linear ? z : tape.activation(z, act);
}

NodeId modular_block(Tape& tape, const Graph& g, NodeId h, std::span<const PropagationRule> rules,
                     const BlockParams& params, Activation act) {
  std::vector<NodeId> ops;
  for (auto rule : rules) ops.push_back(tape.constant(propagation_matrix(g, rule)));
  return modular_block(tape, ops, h, params, act);
}

NodeId residual_head(Tape& tape, std::span<const NodeId> outputs, NodeId w,
                     std::optional<NodeId> b, Activation act) {
  if (outputs.empty()) throw ShapeError("residual_head: at least one layer output is required");
  const std::size_t n = tape.value(outputs[0]).rows();
  for (NodeId o : outputs) {
    if (tape.value(o).rows() != n) {
      throw ShapeError("residual_head: layer outputs disagree on node count (" +
                       std::to_string(n) + " vs " + std::to_string(tape.value(o).rows()) + ")");
    }
  }
  const NodeId z = outputs.size() == 1 ? outputs[0] : tape.concat_cols(outputs);
  NodeId y = tape.matmul(z, w);
  if (b) y = tape.add_bias_row(y, *b);
  return act == Activation::Linear ? y : tape.activation(y, act);
}

NodeId classifier_logits(Tape& tape, NodeId h, NodeId w, NodeId b) {
  return tape.add_bias_row(tape.matmul(h, w), b);
}

NodeId classifier_head(Tape& tape, NodeId h, NodeId w, NodeId b) {
  if (tape.value(w).cols() < 2) throw ShapeError("classifier_head: need at least 2 classes");
  return tape.row_mean_pool(tape.softmax_rows(classifier_logits(tape, h, w, b)));
}

NodeId fc_baseline(Tape& tape, const Graph& g, const FcParams& params, Activation act) {
  const Matrix adj = g.adjacency();
  const NodeId x = tape.constant(Matrix::row(adj.data()));
  const NodeId hidden =
      tape.activation(tape.add_bias_row(tape.matmul(x, params.hidden_w), params.hidden_b), act);
  return tape.add_bias_row(tape.matmul(hidden, params.out_w), params.out_b);
}

NodeId gin_layer(Tape& tape, NodeId adjacency, NodeId h, NodeId w, double eps, Activation act) {
  const NodeId mixed = tape.scale_add(1.0 + eps, h, tape.matmul(adjacency, h));
  const NodeId z = tape.matmul(mixed, w);
  return act == Activation::Linear ? z : tape.activation(z, act);
}

BuiltModel build_model(const ModelSpec& spec, const GraphOperators& ops,
                       const ModelParams& params) {
  check_params(spec, params);
  BuiltModel model;
  Tape& tape = model.tape;
  for (const auto& e : params.entries) model.param_nodes.push_back(tape.parameter(e.value));
  std::size_t next = 0;
  const auto take = [&] { return model.param_nodes[next++]; };
  const auto take_bias = [&]() -> std::optional<NodeId> {
    if (!spec.use_bias) return std::nullopt;
    return take();
  };

  if (spec.arch == Architecture::FcBaseline) {
    if (ops.n != spec.graph_size) {
      throw ShapeError("build_model: FC baseline built for N=" + std::to_string(spec.graph_size) +
                       ", graph has " + std::to_string(ops.n) + " nodes");
    }
    const NodeId x = tape.constant(Matrix::row(ops.adjacency.data()));
    const NodeId hw = take(), hb = take(), ow = take(), ob = take();
    const NodeId hidden =
        tape.activation(tape.add_bias_row(tape.matmul(x, hw), hb), Activation::Sigmoid);
    model.output = tape.add_bias_row(tape.matmul(hidden, ow), ob);
    model.logits = model.output;
    return model;
  }

  std::vector<NodeId> operators;
  for (auto rule : spec.rules) operators.push_back(tape.constant(ops.get(rule)));

  NodeId h = tape.constant(init_attributes(ops.n));
  std::vector<NodeId> layer_outputs;
  for (std::size_t l = 0; l < spec.layers; ++l) {
    if (spec.arch == Architecture::PlainGcn) {
      const NodeId w = take();
      h = gcn_layer(tape, operators[0], h, w, take_bias(), spec.activation);
    } else {
      BlockParams bp;
      for (std::size_t r = 0; r < spec.rules.size(); ++r) bp.branch_weights.push_back(take());
      bp.mix_weight = take();
      bp.mix_bias = take_bias();
      h = modular_block(tape, operators, h, bp, spec.activation);
    }
    layer_outputs.push_back(h);
  }

  std::vector<NodeId> head_inputs;
  if (spec.residual) {
    head_inputs.assign(layer_outputs.rbegin(), layer_outputs.rend());
  } else {
    head_inputs.push_back(layer_outputs.back());
  }

  if (spec.head == HeadKind::RegressionAggregate) {
    const NodeId w = take();
    model.output = residual_head(tape, head_inputs, w, take_bias(), Activation::Linear);
    model.logits = model.output;
  } else {
    NodeId features = head_inputs[0];
    if (spec.residual) {
      const NodeId w = take();
      features = residual_head(tape, head_inputs, w, take_bias(), spec.activation);
    }
    const NodeId w = take(), b = take();
    model.logits = classifier_logits(tape, features, w, b);
    model.output = tape.row_mean_pool(tape.softmax_rows(model.logits));
  }
  return model;
}

BuiltModel build_model(const ModelSpec& spec, const Graph& g, const ModelParams& params) {
  return build_model(spec, GraphOperators::build(g), params);
}

}  // namespace gml
