#include "gml/autodiff.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "gml/error.hpp"

namespace gml {

std::string_view to_string(Activation act) {
  switch (act) {
    case Activation::Linear:
      return "linear";
    case Activation::Relu:
      return "relu";
    case Activation::Sigmoid:
      return "sigmoid";
    case Activation::Tanh:
      return "tanh";
  }
  return "?";
}

Activation parse_activation(std::string_view name) {
  if (name == "linear") return Activation::Linear;
  if (name == "relu") return Activation::Relu;
  if (name == "sigmoid") return Activation::Sigmoid;
  if (name == "tanh") return Activation::Tanh;
  throw ParameterError("unknown activation '" + std::string(name) + "'");
}

std::string_view to_string(OpKind kind) {
  switch (kind) {
    case OpKind::Constant:
      return "Constant";
    case OpKind::Parameter:
      return "Parameter";
    case OpKind::MatMul:
      return "MatMul";
    case OpKind::Add:
      return "Add";
    case OpKind::AddBiasRow:
      return "AddBiasRow";
    case OpKind::ConcatCols:
      return "ConcatCols";
    case OpKind::RowMeanPool:
      return "RowMeanPool";
    case OpKind::Activation:
      return "Activation";
    case OpKind::SoftmaxRows:
      return "SoftmaxRows";
    case OpKind::MseLoss:
      return "MseLoss";
    case OpKind::CrossEntropyLoss:
      return "CrossEntropyLoss";
    case OpKind::ScaleAdd:
      return "ScaleAdd";
  }
  return "?";
}

double activate(Activation act, double x) {
  switch (act) {
    case Activation::Linear:
      return x;
    case Activation::Relu:
      return x > 0.0 ? x : 0.0;
    case Activation::Sigmoid:
      return x >= 0.0 ? 1.0 / (1.0 + std::exp(-x)) : std::exp(x) / (1.0 + std::exp(x));
    case Activation::Tanh:
      return std::tanh(x);
  }
  return x;
}

namespace {

[[noreturn]] void shape_error(OpKind kind, const std::string& expected, const Matrix& actual) {
  throw ShapeError(std::string(to_string(kind)) + ": expected " + expected + ", got " +
                   actual.shape_string());
}

// Row-wise log-softmax.
Matrix log_softmax_rows(const Matrix& z) {
  Matrix out(z.rows(), z.cols());
  for (std::size_t i = 0; i < z.rows(); ++i) {
    const auto row = z.row_span(i);
    const double mx = *std::max_element(row.begin(), row.end());
    double s = 0.0;
    for (double v : row) s += std::exp(v - mx);
    const double lse = mx + std::log(s);
    for (std::size_t k = 0; k < z.cols(); ++k) out(i, k) = row[k] - lse;
  }
  return out;
}

// log(meanᵢ softmax(zᵢ)ₖ) for each class k, given row log-softmax ls.
std::vector<double> log_pooled(const Matrix& ls) {
  std::vector<double> out(ls.cols());
  const double log_n = std::log(static_cast<double>(ls.rows()));
  for (std::size_t k = 0; k < ls.cols(); ++k) {
    double mx = -INFINITY;
    for (std::size_t i = 0; i < ls.rows(); ++i) mx = std::max(mx, ls(i, k));
    double s = 0.0;
    for (std::size_t i = 0; i < ls.rows(); ++i) s += std::exp(ls(i, k) - mx);
    out[k] = mx + std::log(s) - log_n;
  }
  return out;
}

}  // namespace

NodeId Tape::constant(Matrix value) {
  if (!value.all_finite()) throw NumericError("Constant: non-finite value");
  nodes_.push_back({OpKind::Constant, {}, {}, std::move(value), {}, false});
  return nodes_.size() - 1;
}

NodeId Tape::parameter(Matrix value) {
  if (!value.all_finite()) throw NumericError("Parameter: non-finite value");
  nodes_.push_back({OpKind::Parameter, {}, {}, std::move(value), {}, true});
  params_.push_back(nodes_.size() - 1);
  return nodes_.size() - 1;
}

NodeId Tape::record(OpKind kind, std::span<const NodeId> inputs, OpAttrs attrs) {
  if (kind == OpKind::Constant || kind == OpKind::Parameter) {
    throw ShapeError("record: leaves are created with constant() or parameter()");
  }
  Node node{kind, attrs, std::vector<NodeId>(inputs.begin(), inputs.end()), {}, {}, false};
  for (NodeId in : node.inputs) {
    if (in >= nodes_.size()) throw ShapeError("record: input node " + std::to_string(in) + " does not exist");
    node.needs_grad = node.needs_grad || nodes_[in].needs_grad;
  }
  if (kind == OpKind::CrossEntropyLoss) node.needs_grad = nodes_[node.inputs[0]].needs_grad;
  check_shapes(node);
  forward(node);
  nodes_.push_back(std::move(node));
  return nodes_.size() - 1;
}

void Tape::check_shapes(const Node& node) const {
  const auto arity = [&](std::size_t n) {
    if (node.inputs.size() != n) {
      throw ShapeError(std::string(to_string(node.kind)) + ": expected " + std::to_string(n) +
                       " inputs, got " + std::to_string(node.inputs.size()));
    }
  };
  const auto in = [&](std::size_t k) -> const Matrix& { return nodes_[node.inputs[k]].value; };

  switch (node.kind) {
    case OpKind::MatMul:
      arity(2);
      if (in(0).cols() != in(1).rows()) {
        shape_error(node.kind, std::to_string(in(0).cols()) + "xK right operand", in(1));
      }
      break;
    case OpKind::Add:
    case OpKind::MseLoss:
    case OpKind::ScaleAdd:
      arity(2);
      if (!in(0).same_shape(in(1))) shape_error(node.kind, in(0).shape_string(), in(1));
      break;
    case OpKind::AddBiasRow:
      arity(2);
      if (in(1).rows() != 1 || in(1).cols() != in(0).cols()) {
        shape_error(node.kind, "1x" + std::to_string(in(0).cols()) + " bias", in(1));
      }
      break;
    case OpKind::ConcatCols:
      if (node.inputs.empty()) throw ShapeError("ConcatCols: expected at least one input");
      for (std::size_t k = 1; k < node.inputs.size(); ++k) {
        if (in(k).rows() != in(0).rows()) {
          shape_error(node.kind, std::to_string(in(0).rows()) + "xK block", in(k));
        }
      }
      break;
    case OpKind::RowMeanPool:
      arity(1);
      if (in(0).rows() == 0) shape_error(node.kind, "at least one row", in(0));
      break;
    case OpKind::Activation:
    case OpKind::SoftmaxRows:
      arity(1);
      break;
    case OpKind::CrossEntropyLoss:
      arity(2);
      if (in(0).rows() == 0 || in(0).cols() < 2) shape_error(node.kind, "Nxc logits, c >= 2", in(0));
      if (in(1).rows() != 1 || in(1).cols() != in(0).cols()) {
        shape_error(node.kind, "1x" + std::to_string(in(0).cols()) + " target", in(1));
      }
      break;
    case OpKind::Constant:
    case OpKind::Parameter:
      break;
  }
}

void Tape::forward(Node& node) const {
  const auto in = [&](std::size_t k) -> const Matrix& { return nodes_[node.inputs[k]].value; };
  Matrix& out = node.value;

  switch (node.kind) {
    case OpKind::Constant:
    case OpKind::Parameter:
      return;
    case OpKind::MatMul:
      out = gml::matmul(in(0), in(1));
      break;
    case OpKind::Add:
      out = in(0) + in(1);
      break;
    case OpKind::AddBiasRow: {
      out = in(0);
      const auto bias = in(1).row_span(0);
      for (std::size_t i = 0; i < out.rows(); ++i) {
        auto r = out.row_span(i);
        for (std::size_t j = 0; j < r.size(); ++j) r[j] += bias[j];
      }
      break;
    }
    case OpKind::ConcatCols: {
      std::size_t cols = 0;
      for (std::size_t k = 0; k < node.inputs.size(); ++k) cols += in(k).cols();
      out = Matrix(in(0).rows(), cols);
      std::size_t offset = 0;
      for (std::size_t k = 0; k < node.inputs.size(); ++k) {
        const Matrix& block = in(k);
        for (std::size_t i = 0; i < block.rows(); ++i)
          std::copy_n(block.row_span(i).begin(), block.cols(), out.row_span(i).begin() + offset);
        offset += block.cols();
      }
      break;
    }
    case OpKind::RowMeanPool: {
      const Matrix& x = in(0);
      out = Matrix(1, x.cols());
      for (std::size_t i = 0; i < x.rows(); ++i)
        for (std::size_t j = 0; j < x.cols(); ++j) out(0, j) += x(i, j);
      out *= 1.0 / static_cast<double>(x.rows());
      break;
    }
    case OpKind::Activation:
      out = in(0);
      if (node.attrs.activation != Activation::Linear) {
        for (double& v : out.data()) v = activate(node.attrs.activation, v);
      }
      break;
    case OpKind::SoftmaxRows: {
      out = log_softmax_rows(in(0));
      for (double& v : out.data()) v = std::exp(v);
      break;
    }
    case OpKind::MseLoss: {
      double s = 0.0;
      const auto p = in(0).data(), t = in(1).data();
      for (std::size_t i = 0; i < p.size(); ++i) s += (p[i] - t[i]) * (p[i] - t[i]);
      out = Matrix(1, 1, p.empty() ? 0.0 : s / static_cast<double>(p.size()));
      break;
    }
    case OpKind::CrossEntropyLoss: {
      const auto lq = log_pooled(log_softmax_rows(in(0)));
      const auto t = in(1).row_span(0);
      double loss = 0.0;
      for (std::size_t k = 0; k < lq.size(); ++k)
        if (t[k] != 0.0) loss -= t[k] * lq[k];
      out = Matrix(1, 1, loss);
      break;
    }
    case OpKind::ScaleAdd:
      out = node.attrs.alpha * in(0);
      out += in(1);
      break;
  }
  if (!out.all_finite()) {
    throw NumericError(std::string(to_string(node.kind)) + ": non-finite forward value");
  }
}

void Tape::set_value(NodeId id, Matrix value) {
  Node& node = nodes_.at(id);
  if (node.kind != OpKind::Constant && node.kind != OpKind::Parameter) {
    throw ShapeError("set_value: node " + std::to_string(id) + " is not a leaf");
  }
  if (!node.value.same_shape(value)) shape_error(node.kind, node.value.shape_string(), value);
  node.value = std::move(value);
}

void Tape::replay() {
  for (auto& node : nodes_) forward(node);
}

Matrix& Tape::grad_slot(NodeId id) {
  Node& node = nodes_[id];
  if (node.grad.empty() && !node.value.empty()) node.grad = Matrix(node.value.rows(), node.value.cols());
  return node.grad;
}

std::vector<Matrix> Tape::backward(NodeId loss) {
  if (loss >= nodes_.size()) throw ShapeError("backward: loss node does not exist");
  const Matrix& lv = nodes_[loss].value;
  if (lv.rows() != 1 || lv.cols() != 1) {
    throw ShapeError("backward: loss must be 1x1, got " + lv.shape_string());
  }
  for (auto& node : nodes_) node.grad = Matrix();
  if (nodes_[loss].needs_grad) {
    grad_slot(loss)(0, 0) = 1.0;
    for (std::size_t k = loss + 1; k-- > 0;) {
      const Node& node = nodes_[k];
      if (!node.needs_grad || node.grad.empty()) continue;
      backward_node(node);
    }
  }
  std::vector<Matrix> grads;
  grads.reserve(params_.size());
  for (NodeId p : params_) {
    const Node& node = nodes_[p];
    grads.push_back(node.grad.empty() ? Matrix(node.value.rows(), node.value.cols()) : node.grad);
  }
  return grads;
}

void Tape::backward_node(const Node& node) {
  const Matrix& g = node.grad;
  const auto needs = [&](std::size_t k) { return nodes_[node.inputs[k]].needs_grad; };
  const auto in = [&](std::size_t k) -> const Matrix& { return nodes_[node.inputs[k]].value; };

  switch (node.kind) {
    case OpKind::Constant:
    case OpKind::Parameter:
      return;
    case OpKind::MatMul:
      if (needs(0)) matmul_nt_acc(g, in(1), grad_slot(node.inputs[0]));
      if (needs(1)) matmul_tn_acc(in(0), g, grad_slot(node.inputs[1]));
      return;
    case OpKind::Add:
      if (needs(0)) grad_slot(node.inputs[0]) += g;
      if (needs(1)) grad_slot(node.inputs[1]) += g;
      return;
    case OpKind::AddBiasRow:
      if (needs(0)) grad_slot(node.inputs[0]) += g;
      if (needs(1)) {
        Matrix& gb = grad_slot(node.inputs[1]);
        for (std::size_t i = 0; i < g.rows(); ++i)
          for (std::size_t j = 0; j < g.cols(); ++j) gb(0, j) += g(i, j);
      }
      return;
    case OpKind::ConcatCols: {
      std::size_t offset = 0;
      for (std::size_t k = 0; k < node.inputs.size(); ++k) {
        const std::size_t cols = in(k).cols();
        if (needs(k)) {
          Matrix& gk = grad_slot(node.inputs[k]);
          for (std::size_t i = 0; i < g.rows(); ++i)
            for (std::size_t j = 0; j < cols; ++j) gk(i, j) += g(i, offset + j);
        }
        offset += cols;
      }
      return;
    }
    case OpKind::RowMeanPool: {
      if (!needs(0)) return;
      Matrix& gx = grad_slot(node.inputs[0]);
      const double inv = 1.0 / static_cast<double>(gx.rows());
      for (std::size_t i = 0; i < gx.rows(); ++i)
        for (std::size_t j = 0; j < gx.cols(); ++j) gx(i, j) += g(0, j) * inv;
      return;
    }
    case OpKind::Activation: {
      if (!needs(0)) return;
      Matrix& gx = grad_slot(node.inputs[0]);
      const auto x = in(0).data(), y = node.value.data(), gy = g.data();
      auto gxd = gx.data();
      for (std::size_t i = 0; i < gxd.size(); ++i) {
        double d = 1.0;
        switch (node.attrs.activation) {
          case Activation::Linear:
            break;
          case Activation::Relu:
            d = x[i] > 0.0 ? 1.0 : 0.0;
            break;
          case Activation::Sigmoid:
            d = y[i] * (1.0 - y[i]);
            break;
          case Activation::Tanh:
            d = 1.0 - y[i] * y[i];
            break;
        }
        gxd[i] += gy[i] * d;
      }
      return;
    }
    case OpKind::SoftmaxRows: {
      if (!needs(0)) return;
      Matrix& gx = grad_slot(node.inputs[0]);
      const Matrix& y = node.value;
      for (std::size_t i = 0; i < y.rows(); ++i) {
        double dot = 0.0;
        for (std::size_t k = 0; k < y.cols(); ++k) dot += g(i, k) * y(i, k);
        for (std::size_t k = 0; k < y.cols(); ++k) gx(i, k) += y(i, k) * (g(i, k) - dot);
      }
      return;
    }
    case OpKind::MseLoss: {
      const auto p = in(0).data(), t = in(1).data();
      const double scale = 2.0 * g(0, 0) / static_cast<double>(p.size());
      if (needs(0)) {
        auto gp = grad_slot(node.inputs[0]).data();
        for (std::size_t i = 0; i < p.size(); ++i) gp[i] += scale * (p[i] - t[i]);
      }
      if (needs(1)) {
        auto gt = grad_slot(node.inputs[1]).data();
        for (std::size_t i = 0; i < p.size(); ++i) gt[i] -= scale * (p[i] - t[i]);
      }
      return;
    }
    case OpKind::CrossEntropyLoss: {
      if (!needs(0)) return;
      // dL/dzᵢⱼ = −(1/N)·[tⱼ·rᵢⱼ − sᵢⱼ·Σₖ tₖ·rᵢₖ] with s = softmax rows and
      // rᵢₖ = sᵢₖ / qₖ, q the pooled distribution. r is formed in log space.
      const Matrix ls = log_softmax_rows(in(0));
      const auto lq = log_pooled(ls);
      const auto t = in(1).row_span(0);
      const std::size_t n = ls.rows(), c = ls.cols();
      const double inv_n = 1.0 / static_cast<double>(n);
      Matrix& gz = grad_slot(node.inputs[0]);
      std::vector<double> r(c);
      for (std::size_t i = 0; i < n; ++i) {
        double tr = 0.0;
        for (std::size_t k = 0; k < c; ++k) {
          r[k] = std::exp(ls(i, k) - lq[k]);
          tr += t[k] * r[k];
        }
        for (std::size_t j = 0; j < c; ++j) {
          const double s = std::exp(ls(i, j));
          gz(i, j) += -g(0, 0) * inv_n * (t[j] * r[j] - s * tr);
        }
      }
      return;
    }
    case OpKind::ScaleAdd:
      if (needs(0)) {
        Matrix& gx = grad_slot(node.inputs[0]);
        const auto gd = g.data();
        auto gxd = gx.data();
        for (std::size_t i = 0; i < gd.size(); ++i) gxd[i] += node.attrs.alpha * gd[i];
      }
      if (needs(1)) grad_slot(node.inputs[1]) += g;
      return;
  }
}

double grad_check(Tape& tape, NodeId loss, double step) {
  if (!(step > 0.0)) throw ParameterError("grad_check: step must be positive");
  const auto analytic = tape.backward(loss);
  const auto params = std::vector<NodeId>(tape.parameters().begin(), tape.parameters().end());
  double worst = 0.0;
  for (std::size_t p = 0; p < params.size(); ++p) {
    const Matrix original = tape.value(params[p]);
    for (std::size_t e = 0; e < original.size(); ++e) {
      Matrix probe = original;
      probe.data()[e] = original.data()[e] + step;
      tape.set_value(params[p], probe);
      tape.replay();
      const double up = tape.value(loss)(0, 0);
      probe.data()[e] = original.data()[e] - step;
      tape.set_value(params[p], probe);
      tape.replay();
      const double down = tape.value(loss)(0, 0);
      const double fd = (up - down) / (2.0 * step);
      const double ad = analytic[p].data()[e];
      worst = std::max(worst, std::abs(ad - fd) / std::max(1e-8, std::abs(ad) + std::abs(fd)));
    }
    tape.set_value(params[p], original);
  }
  tape.replay();
  return worst;
}

}  // namespace gml
