// Copyright 2026 The TArC Annotator Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "tarc/tape.h"

#include <cmath>
#include <limits>

#include "tarc/error.h"

namespace tarc::nn {

namespace {

double sigmoid_scalar(double x) { return 1.0 / (1.0 + std::exp(-x)); }

void check(bool ok, const char *what) {
  if (!ok) throw Error(ErrorCode::kInvalidArgument, std::string("tape: ") + what);
}

}  // namespace

void softmax_inplace(Eigen::Ref<RowVector> row) {
  const double m = row.maxCoeff();
  row = (row.array() - m).exp();
  row /= row.sum();
}

void lstm_cell(Eigen::Ref<RowVector> gates, const RowVector &c_prev, RowVector &h,
               RowVector &c) {
  const Eigen::Index n = c_prev.size();
  c.resize(n);
  h.resize(n);
  for (Eigen::Index j = 0; j < n; ++j) {
    const double i = sigmoid_scalar(gates[j]);
    const double f = sigmoid_scalar(gates[n + j]);
    const double g = std::tanh(gates[2 * n + j]);
    const double o = sigmoid_scalar(gates[3 * n + j]);
    gates[j] = i;
    gates[n + j] = f;
    gates[2 * n + j] = g;
    gates[3 * n + j] = o;
    c[j] = f * c_prev[j] + i * g;
    h[j] = o * std::tanh(c[j]);
  }
}

Var Tape::push(Matrix value, bool needs_grad, std::function<void(Tape &)> back) {
  Node n;
  n.value = std::move(value);
  n.needs_grad = record_ && needs_grad;
  if (n.needs_grad) n.back = std::move(back);
  nodes_.push_back(std::move(n));
  return Var(static_cast<int>(nodes_.size() - 1));
}

Matrix &Tape::grad_ref(Var v) {
  Node &n = node(v);
  if (n.grad.size() == 0) {
    const Matrix &val = value(v);
    n.grad = Matrix::Zero(val.rows(), val.cols());
  }
  return n.grad;
}

Var Tape::constant(Matrix value) { return push(std::move(value), false); }

Var Tape::param(Tensor &tensor) {
  auto it = params_.find(&tensor);
  if (it != params_.end()) return Var(it->second);
  Var v = push(Matrix(), true);
  node(v).ref = &tensor.value;
  node(v).param = &tensor;
  params_.emplace(&tensor, v.id_);
  return v;
}

Var Tape::fixed(const Tensor &tensor) {
  Var v = push(Matrix(), false);
  node(v).ref = &tensor.value;
  return v;
}

Var Tape::matmul(Var a, Var b) {
  check(value(a).cols() == value(b).rows(), "matmul shape");
  const Var out = next();
  return push(value(a) * value(b), needs(a) || needs(b), [a, b, out](Tape &t) {
    const Matrix &g = t.grad(out);
    if (t.needs(a)) t.grad_ref(a).noalias() += g * t.value(b).transpose();
    if (t.needs(b)) t.grad_ref(b).noalias() += t.value(a).transpose() * g;
  });
}

Var Tape::matmul_nt(Var a, Var b) {
  check(value(a).cols() == value(b).cols(), "matmul_nt shape");
  const Var out = next();
  return push(value(a) * value(b).transpose(), needs(a) || needs(b),
              [a, b, out](Tape &t) {
                const Matrix &g = t.grad(out);
                if (t.needs(a)) t.grad_ref(a).noalias() += g * t.value(b);
                if (t.needs(b)) t.grad_ref(b).noalias() += g.transpose() * t.value(a);
              });
}

Var Tape::add(Var a, Var b) {
  check(value(a).rows() == value(b).rows() && value(a).cols() == value(b).cols(),
        "add shape");
  const Var out = next();
  return push(value(a) + value(b), needs(a) || needs(b), [a, b, out](Tape &t) {
    const Matrix &g = t.grad(out);
    if (t.needs(a)) t.grad_ref(a) += g;
    if (t.needs(b)) t.grad_ref(b) += g;
  });
}

Var Tape::add_row(Var a, Var row) {
  check(value(row).rows() == 1 && value(row).cols() == value(a).cols(), "add_row shape");
  const Var out = next();
  Matrix result = value(a);
  result.rowwise() += value(row).row(0);
  return push(std::move(result), needs(a) || needs(row), [a, row, out](Tape &t) {
    const Matrix &g = t.grad(out);
    if (t.needs(a)) t.grad_ref(a) += g;
    if (t.needs(row)) t.grad_ref(row) += g.colwise().sum();
  });
}

Var Tape::mul(Var a, Var b) {
  check(value(a).rows() == value(b).rows() && value(a).cols() == value(b).cols(),
        "mul shape");
  const Var out = next();
  return push(value(a).cwiseProduct(value(b)), needs(a) || needs(b),
              [a, b, out](Tape &t) {
                const Matrix &g = t.grad(out);
                if (t.needs(a)) t.grad_ref(a) += g.cwiseProduct(t.value(b));
                if (t.needs(b)) t.grad_ref(b) += g.cwiseProduct(t.value(a));
              });
}

Var Tape::scale(Var a, double factor) {
  const Var out = next();
  return push(value(a) * factor, needs(a), [a, out, factor](Tape &t) {
    t.grad_ref(a) += t.grad(out) * factor;
  });
}

Var Tape::tanh(Var a) {
  const Var out = next();
  return push(value(a).array().tanh().matrix(), needs(a), [a, out](Tape &t) {
    const Matrix &y = t.value(out);
    t.grad_ref(a).array() += t.grad(out).array() * (1.0 - y.array().square());
  });
}

Var Tape::sigmoid(Var a) {
  const Var out = next();
  Matrix y = value(a).unaryExpr([](double x) { return sigmoid_scalar(x); });
  return push(std::move(y), needs(a), [a, out](Tape &t) {
    const Matrix &y = t.value(out);
    t.grad_ref(a).array() += t.grad(out).array() * y.array() * (1.0 - y.array());
  });
}

Var Tape::relu(Var a) {
  const Var out = next();
  return push(value(a).cwiseMax(0.0), needs(a), [a, out](Tape &t) {
    const Matrix &x = t.value(a);
    t.grad_ref(a).array() +=
        t.grad(out).array() * (x.array() > 0.0).cast<double>();
  });
}

Var Tape::concat_cols(std::span<const Var> parts) {
  check(!parts.empty(), "concat of nothing");
  const Eigen::Index rows = value(parts[0]).rows();
  Eigen::Index cols = 0;
  bool any = false;
  for (Var p : parts) {
    check(value(p).rows() == rows, "concat_cols rows");
    cols += value(p).cols();
    any = any || needs(p);
  }
  Matrix result(rows, cols);
  Eigen::Index at = 0;
  for (Var p : parts) {
    result.middleCols(at, value(p).cols()) = value(p);
    at += value(p).cols();
  }
  const Var out = next();
  std::vector<Var> inputs(parts.begin(), parts.end());
  return push(std::move(result), any, [inputs, out](Tape &t) {
    const Matrix &g = t.grad(out);
    Eigen::Index at = 0;
    for (Var p : inputs) {
      const Eigen::Index c = t.value(p).cols();
      if (t.needs(p)) t.grad_ref(p) += g.middleCols(at, c);
      at += c;
    }
  });
}

Var Tape::slice_cols(Var a, int begin, int count) {
  check(begin >= 0 && count >= 0 && begin + count <= value(a).cols(), "slice_cols range");
  const Var out = next();
  return push(value(a).middleCols(begin, count), needs(a), [a, out, begin, count](Tape &t) {
    t.grad_ref(a).middleCols(begin, count) += t.grad(out);
  });
}

Var Tape::softmax_rows(Var a, bool causal) {
  const Matrix &x = value(a);
  Matrix y = x;
  for (Eigen::Index i = 0; i < y.rows(); ++i) {
    if (causal) {
      const Eigen::Index keep = std::min<Eigen::Index>(i + 1, y.cols());
      softmax_inplace(y.row(i).head(keep));
      y.row(i).tail(y.cols() - keep).setZero();
    } else {
      softmax_inplace(y.row(i));
    }
  }
  const Var out = next();
  return push(std::move(y), needs(a), [a, out](Tape &t) {
    const Matrix &y = t.value(out);
    const Matrix &g = t.grad(out);
    const Eigen::VectorXd dots = g.cwiseProduct(y).rowwise().sum();
    Matrix dx = y.cwiseProduct(g);
    dx -= y.cwiseProduct(dots.replicate(1, y.cols()));
    t.grad_ref(a) += dx;
  });
}

Var Tape::layer_norm(Var a, Var gain, Var bias, double eps) {
  const Matrix &x = value(a);
  const Eigen::Index n = x.cols();
  Matrix xhat(x.rows(), n);
  Eigen::VectorXd inv(x.rows());
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    const double mu = x.row(i).mean();
    const double var = (x.row(i).array() - mu).square().mean();
    inv[i] = 1.0 / std::sqrt(var + eps);
    xhat.row(i) = (x.row(i).array() - mu) * inv[i];
  }
  Matrix y = xhat;
  y.array().rowwise() *= value(gain).row(0).array();
  y.rowwise() += value(bias).row(0);
  const Var out = next();
  return push(std::move(y), needs(a) || needs(gain) || needs(bias),
              [a, gain, bias, out, xhat = std::move(xhat), inv](Tape &t) {
                const Matrix &g = t.grad(out);
                if (t.needs(gain)) t.grad_ref(gain) += g.cwiseProduct(xhat).colwise().sum();
                if (t.needs(bias)) t.grad_ref(bias) += g.colwise().sum();
                if (!t.needs(a)) return;
                Matrix dxhat = g;
                dxhat.array().rowwise() *= t.value(gain).row(0).array();
                const double n = static_cast<double>(dxhat.cols());
                Matrix &da = t.grad_ref(a);
                for (Eigen::Index i = 0; i < dxhat.rows(); ++i) {
                  const double s1 = dxhat.row(i).sum();
                  const double s2 = dxhat.row(i).dot(xhat.row(i));
                  da.row(i).array() += inv[i] / n *
                                       (n * dxhat.row(i).array() - s1 -
                                        xhat.row(i).array() * s2);
                }
              });
}

Var Tape::embed(Var table, std::span<const int> ids) {
  const Matrix &tab = value(table);
  Matrix result(static_cast<Eigen::Index>(ids.size()), tab.cols());
  for (size_t i = 0; i < ids.size(); ++i) {
    check(ids[i] >= 0 && ids[i] < tab.rows(), "embedding id out of range");
    result.row(static_cast<Eigen::Index>(i)) = tab.row(ids[i]);
  }
  const Var out = next();
  std::vector<int> idv(ids.begin(), ids.end());
  return push(std::move(result), needs(table), [table, out, idv](Tape &t) {
    const Matrix &g = t.grad(out);
    Matrix &dt = t.grad_ref(table);
    for (size_t i = 0; i < idv.size(); ++i) dt.row(idv[i]) += g.row(static_cast<Eigen::Index>(i));
  });
}

Var Tape::dropout(Var a, double rate, Rng &rng) {
  if (rate <= 0.0) return a;
  const Matrix &x = value(a);
  Matrix mask(x.rows(), x.cols());
  const double keep = 1.0 / (1.0 - rate);
  for (Eigen::Index i = 0; i < mask.size(); ++i) {
    mask.data()[i] = rng.uniform01() < rate ? 0.0 : keep;
  }
  const Var out = next();
  Matrix y = x.cwiseProduct(mask);
  return push(std::move(y), needs(a), [a, out, mask = std::move(mask)](Tape &t) {
    t.grad_ref(a) += t.grad(out).cwiseProduct(mask);
  });
}

Var Tape::lstm(Var xw, Var w_hh, Var h0, Var c0, bool reverse, Matrix *final_cell) {
  const Matrix &x = value(xw);
  const Matrix &w = value(w_hh);
  const Eigen::Index steps = x.rows();
  const Eigen::Index hidden = w.rows();
  check(x.cols() == 4 * hidden && w.cols() == 4 * hidden, "lstm shape");
  check(value(h0).cols() == hidden && value(c0).cols() == hidden, "lstm state shape");

  Matrix gates(steps, 4 * hidden);
  Matrix cells(steps, hidden);
  Matrix hs(steps, hidden);
  RowVector h = value(h0).row(0);
  RowVector c = value(c0).row(0);
  RowVector h_new, c_new;
  RowVector pre(4 * hidden);
  for (Eigen::Index s = 0; s < steps; ++s) {
    const Eigen::Index step = reverse ? steps - 1 - s : s;
    pre.noalias() = h * w;
    pre += x.row(step);
    lstm_cell(pre, c, h_new, c_new);
    gates.row(step) = pre;
    cells.row(step) = c_new;
    hs.row(step) = h_new;
    h = h_new;
    c = c_new;
  }
  if (final_cell != nullptr) *final_cell = c;

  const Var out = next();
  const bool any = needs(xw) || needs(w_hh) || needs(h0) || needs(c0);
  return push(std::move(hs), any,
              [xw, w_hh, h0, c0, out, reverse, gates = std::move(gates),
               cells = std::move(cells)](Tape &t) {
                const Matrix &dout = t.grad(out);
                const Matrix &hs = t.value(out);
                const Matrix &w = t.value(w_hh);
                const Eigen::Index steps = hs.rows();
                const Eigen::Index n = hs.cols();
                Matrix dgates(steps, 4 * n);
                Matrix h_prev(steps, n);
                RowVector dh_next = RowVector::Zero(n);
                RowVector dc_next = RowVector::Zero(n);
                for (Eigen::Index s = steps - 1; s >= 0; --s) {
                  const Eigen::Index step = reverse ? steps - 1 - s : s;
                  const Eigen::Index prev = reverse ? step + 1 : step - 1;
                  const bool first = s == 0;
                  if (first) {
                    h_prev.row(step) = t.value(h0).row(0);
                  } else {
                    h_prev.row(step) = hs.row(prev);
                  }
                  const RowVector c_prev =
                      first ? RowVector(t.value(c0).row(0)) : RowVector(cells.row(prev));
                  for (Eigen::Index j = 0; j < n; ++j) {
                    const double i = gates(step, j);
                    const double f = gates(step, n + j);
                    const double g = gates(step, 2 * n + j);
                    const double o = gates(step, 3 * n + j);
                    const double tc = std::tanh(cells(step, j));
                    const double dh = dout(step, j) + dh_next[j];
                    const double dc = dc_next[j] + dh * o * (1.0 - tc * tc);
                    dgates(step, j) = dc * g * i * (1.0 - i);
                    dgates(step, n + j) = dc * c_prev[j] * f * (1.0 - f);
                    dgates(step, 2 * n + j) = dc * i * (1.0 - g * g);
                    dgates(step, 3 * n + j) = dh * tc * o * (1.0 - o);
                    dc_next[j] = dc * f;
                  }
                  dh_next.noalias() = dgates.row(step) * w.transpose();
                }
                if (t.needs(xw)) t.grad_ref(xw) += dgates;
                if (t.needs(w_hh)) t.grad_ref(w_hh).noalias() += h_prev.transpose() * dgates;
                if (t.needs(h0)) t.grad_ref(h0) += dh_next;
                if (t.needs(c0)) t.grad_ref(c0) += dc_next;
              });
}

Var Tape::cross_entropy(Var logits, std::span<const int> targets, int pad) {
  const Matrix &z = value(logits);
  check(static_cast<Eigen::Index>(targets.size()) == z.rows(), "cross_entropy rows");
  Matrix probs = z;
  double total = 0.0;
  size_t count = 0;
  for (Eigen::Index i = 0; i < z.rows(); ++i) {
    softmax_inplace(probs.row(i));
    const int y = targets[static_cast<size_t>(i)];
    if (y == pad) continue;
    check(y >= 0 && y < z.cols(), "cross_entropy target out of range");
    const double m = z.row(i).maxCoeff();
    const double lse = m + std::log((z.row(i).array() - m).exp().sum());
    total += lse - z(i, y);
    ++count;
  }
  Matrix loss(1, 1);
  loss(0, 0) = count == 0 ? 0.0 : total / static_cast<double>(count);
  const Var out = next();
  std::vector<int> ys(targets.begin(), targets.end());
  return push(std::move(loss), needs(logits) && count > 0,
              [logits, out, ys, pad, count, probs = std::move(probs)](Tape &t) {
                const double g = t.grad(out)(0, 0) / static_cast<double>(count);
                Matrix &dz = t.grad_ref(logits);
                for (Eigen::Index i = 0; i < probs.rows(); ++i) {
                  const int y = ys[static_cast<size_t>(i)];
                  if (y == pad) continue;
                  dz.row(i) += g * probs.row(i);
                  dz(i, y) -= g;
                }
              });
}

Var Tape::soft_cross_entropy(Var logits, const Matrix &target_probs) {
  const Matrix &z = value(logits);
  check(target_probs.rows() == z.rows() && target_probs.cols() == z.cols(),
        "soft_cross_entropy shape");
  Matrix probs = z;
  double total = 0.0;
  for (Eigen::Index i = 0; i < z.rows(); ++i) {
    softmax_inplace(probs.row(i));
    const double m = z.row(i).maxCoeff();
    const double lse = m + std::log((z.row(i).array() - m).exp().sum());
    total += (target_probs.row(i).array() * (lse - z.row(i).array())).sum();
  }
  const double rows = static_cast<double>(z.rows());
  Matrix loss(1, 1);
  loss(0, 0) = total / rows;
  const Var out = next();
  return push(std::move(loss), needs(logits),
              [logits, out, rows, target_probs, probs = std::move(probs)](Tape &t) {
                const double g = t.grad(out)(0, 0) / rows;
                // Each target row sums to one, so d/dz = p - q.
                Matrix d = probs;
                for (Eigen::Index i = 0; i < d.rows(); ++i) {
                  d.row(i) = probs.row(i) * target_probs.row(i).sum() - target_probs.row(i);
                }
                t.grad_ref(logits) += g * d;
              });
}

Var Tape::sum(std::span<const Var> scalars) {
  Matrix total = Matrix::Zero(1, 1);
  bool any = false;
  for (Var s : scalars) {
    check(value(s).size() == 1, "sum of non-scalar");
    total(0, 0) += value(s)(0, 0);
    any = any || needs(s);
  }
  const Var out = next();
  std::vector<Var> inputs(scalars.begin(), scalars.end());
  return push(std::move(total), any, [inputs, out](Tape &t) {
    const double g = t.grad(out)(0, 0);
    for (Var s : inputs) {
      if (t.needs(s)) t.grad_ref(s)(0, 0) += g;
    }
  });
}

void Tape::backward(Var root) {
  check(record_, "backward on an evaluation-only tape");
  if (!needs(root)) return;
  Matrix &g = grad_ref(root);
  g.setOnes();
  for (int id = root.id_; id >= 0; --id) {
    Node &n = nodes_[static_cast<size_t>(id)];
    if (!n.needs_grad || n.grad.size() == 0) continue;
    if (n.back) n.back(*this);
    if (n.param != nullptr) {
      if (n.param->grad.size() == 0) {
        n.param->grad = Matrix::Zero(n.param->value.rows(), n.param->value.cols());
      }
      n.param->grad += n.grad;
    }
  }
}

}  // namespace tarc::nn
