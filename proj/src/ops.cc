// Copyright 2026 The fndkit Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "fndkit/ops.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include <Eigen/Core>
#include <fmt/format.h>

namespace fndkit::ops {
namespace {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MatMap = Eigen::Map<RowMatrix>;
using ConstMatMap = Eigen::Map<const RowMatrix>;

using detail::grad_of;
using detail::make_result;

void expect_same_shape(const Var& a, const Var& b, const char* op) {
  if (a.shape() != b.shape()) {
    throw std::invalid_argument(fmt::format("{}: shape mismatch {} vs {}", op,
                                            shape_string(a.shape()),
                                            shape_string(b.shape())));
  }
}

void expect_rank(const Var& x, std::size_t rank, const char* op) {
  if (x.shape().size() != rank) {
    throw std::invalid_argument(fmt::format("{}: expected rank {}, got {}", op, rank,
                                            shape_string(x.shape())));
  }
}

Node& parent(Node& self, std::size_t i) { return *self.parents[i]; }

}  // namespace

Var add(const Var& a, const Var& b) {
  expect_same_shape(a, b, "add");
  Tensor out = a.value();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += b.value()[i];
  return make_result(std::move(out), {a, b}, [](Node& self) {
    for (std::size_t p = 0; p < 2; ++p) {
      if (Tensor* g = grad_of(parent(self, p))) {
        for (std::size_t i = 0; i < g->size(); ++i) (*g)[i] += self.grad[i];
      }
    }
  });
}

Var mul(const Var& a, const Var& b) {
  expect_same_shape(a, b, "mul");
  Tensor out = a.value();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] *= b.value()[i];
  return make_result(std::move(out), {a, b}, [](Node& self) {
    Node& pa = parent(self, 0);
    Node& pb = parent(self, 1);
    if (Tensor* g = grad_of(pa)) {
      for (std::size_t i = 0; i < g->size(); ++i) (*g)[i] += self.grad[i] * pb.value[i];
    }
    if (Tensor* g = grad_of(pb)) {
      for (std::size_t i = 0; i < g->size(); ++i) (*g)[i] += self.grad[i] * pa.value[i];
    }
  });
}

Var scale(const Var& x, double factor) {
  Tensor out = x.value();
  for (double& v : out.values()) v *= factor;
  return make_result(std::move(out), {x}, [factor](Node& self) {
    if (Tensor* g = grad_of(parent(self, 0))) {
      for (std::size_t i = 0; i < g->size(); ++i) (*g)[i] += factor * self.grad[i];
    }
  });
}

Var add_bias(const Var& x, const Var& bias) {
  expect_rank(bias, 1, "add_bias");
  const std::size_t n = bias.shape()[0];
  if (x.shape().empty() || x.shape().back() != n) {
    throw std::invalid_argument(fmt::format("add_bias: bias {} does not match input {}",
                                            shape_string(bias.shape()),
                                            shape_string(x.shape())));
  }
  Tensor out = x.value();
  const std::size_t rows = out.size() / std::max<std::size_t>(n, 1);
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t j = 0; j < n; ++j) out[r * n + j] += bias.value()[j];
  }
  return make_result(std::move(out), {x, bias}, [rows, n](Node& self) {
    if (Tensor* g = grad_of(parent(self, 0))) {
      for (std::size_t i = 0; i < g->size(); ++i) (*g)[i] += self.grad[i];
    }
    if (Tensor* g = grad_of(parent(self, 1))) {
      for (std::size_t r = 0; r < rows; ++r) {
        for (std::size_t j = 0; j < n; ++j) (*g)[j] += self.grad[r * n + j];
      }
    }
  });
}

Var matmul(const Var& x, const Var& w) {
  expect_rank(w, 2, "matmul weight");
  if (x.shape().empty() || x.shape().back() != w.shape()[0]) {
    throw std::invalid_argument(fmt::format("matmul: cannot multiply {} by {}",
                                            shape_string(x.shape()),
                                            shape_string(w.shape())));
  }
  const std::size_t k = w.shape()[0];
  const std::size_t n = w.shape()[1];
  const std::size_t m = k == 0 ? 0 : x.value().size() / k;
  Shape out_shape = x.shape();
  out_shape.back() = n;
  Tensor out(out_shape);
  MatMap(out.data(), m, n).noalias() =
      ConstMatMap(x.value().data(), m, k) * ConstMatMap(w.value().data(), k, n);
  return make_result(std::move(out), {x, w}, [m, k, n](Node& self) {
    Node& px = parent(self, 0);
    Node& pw = parent(self, 1);
    ConstMatMap dy(self.grad.data(), m, n);
    if (Tensor* g = grad_of(px)) {
      MatMap(g->data(), m, k).noalias() += dy * ConstMatMap(pw.value.data(), k, n).transpose();
    }
    if (Tensor* g = grad_of(pw)) {
      MatMap(g->data(), k, n).noalias() += ConstMatMap(px.value.data(), m, k).transpose() * dy;
    }
  });
}

Var bmm(const Var& a, const Var& b, bool transpose_b) {
  expect_rank(a, 3, "bmm lhs");
  expect_rank(b, 3, "bmm rhs");
  const std::size_t batch = a.shape()[0];
  const std::size_t m = a.shape()[1];
  const std::size_t k = a.shape()[2];
  const std::size_t kb = transpose_b ? b.shape()[2] : b.shape()[1];
  const std::size_t n = transpose_b ? b.shape()[1] : b.shape()[2];
  if (b.shape()[0] != batch || kb != k) {
    throw std::invalid_argument(fmt::format("bmm: cannot multiply {} by {}{}",
                                            shape_string(a.shape()),
                                            shape_string(b.shape()),
                                            transpose_b ? " (transposed)" : ""));
  }
  const std::size_t b_rows = transpose_b ? n : k;
  const std::size_t b_cols = transpose_b ? k : n;
  Tensor out({batch, m, n});
  for (std::size_t i = 0; i < batch; ++i) {
    ConstMatMap am(a.value().data() + i * m * k, m, k);
    ConstMatMap bm(b.value().data() + i * k * n, b_rows, b_cols);
    MatMap om(out.data() + i * m * n, m, n);
    if (transpose_b) {
      om.noalias() = am * bm.transpose();
    } else {
      om.noalias() = am * bm;
    }
  }
  return make_result(std::move(out), {a, b},
                     [batch, m, k, n, b_rows, b_cols, transpose_b](Node& self) {
    Node& pa = parent(self, 0);
    Node& pb = parent(self, 1);
    Tensor* ga = grad_of(pa);
    Tensor* gb = grad_of(pb);
    for (std::size_t i = 0; i < batch; ++i) {
      ConstMatMap dy(self.grad.data() + i * m * n, m, n);
      ConstMatMap am(pa.value.data() + i * m * k, m, k);
      ConstMatMap bm(pb.value.data() + i * k * n, b_rows, b_cols);
      if (ga) {
        MatMap da(ga->data() + i * m * k, m, k);
        if (transpose_b) {
          da.noalias() += dy * bm;
        } else {
          da.noalias() += dy * bm.transpose();
        }
      }
      if (gb) {
        MatMap db(gb->data() + i * k * n, b_rows, b_cols);
        if (transpose_b) {
          db.noalias() += dy.transpose() * am;
        } else {
          db.noalias() += am.transpose() * dy;
        }
      }
    }
  });
}

Var relu(const Var& x) {
  Tensor out = x.value();
  for (double& v : out.values()) v = v > 0.0 ? v : 0.0;
  return make_result(std::move(out), {x}, [](Node& self) {
    Node& px = parent(self, 0);
    if (Tensor* g = grad_of(px)) {
      for (std::size_t i = 0; i < g->size(); ++i) {
        if (px.value[i] > 0.0) (*g)[i] += self.grad[i];
      }
    }
  });
}

Var reshape(const Var& x, Shape shape) {
  Tensor out = x.value().reshaped(std::move(shape));
  return make_result(std::move(out), {x}, [](Node& self) {
    if (Tensor* g = grad_of(parent(self, 0))) {
      for (std::size_t i = 0; i < g->size(); ++i) (*g)[i] += self.grad[i];
    }
  });
}

Var embedding(const Var& weight, const Tensor& ids) {
  expect_rank(weight, 2, "embedding table");
  const std::size_t vocab = weight.shape()[0];
  const std::size_t dim = weight.shape()[1];
  std::vector<std::size_t> rows(ids.size());
  for (std::size_t i = 0; i < ids.size(); ++i) {
    const double id = ids[i];
    if (!(id >= 0.0) || id >= static_cast<double>(vocab) || id != std::floor(id)) {
      throw std::invalid_argument(fmt::format(
          "embedding: id {} outside table of {} rows", id, vocab));
    }
    rows[i] = static_cast<std::size_t>(id);
  }
  Shape out_shape = ids.shape();
  out_shape.push_back(dim);
  Tensor out(out_shape);
  const double* table = weight.value().data();
  for (std::size_t i = 0; i < rows.size(); ++i) {
    std::copy_n(table + rows[i] * dim, dim, out.data() + i * dim);
  }
  return make_result(std::move(out), {weight}, [rows = std::move(rows), dim](Node& self) {
    if (Tensor* g = grad_of(parent(self, 0))) {
      for (std::size_t i = 0; i < rows.size(); ++i) {
        double* dst = g->data() + rows[i] * dim;
        const double* src = self.grad.data() + i * dim;
        for (std::size_t j = 0; j < dim; ++j) dst[j] += src[j];
      }
    }
  });
}

Var conv1d_time(const Var& x, const Var& weight, const Var& bias) {
  expect_rank(x, 3, "conv1d_time input");
  expect_rank(weight, 2, "conv1d_time weight");
  expect_rank(bias, 1, "conv1d_time bias");
  const std::size_t batch = x.shape()[0];
  const std::size_t len = x.shape()[1];
  const std::size_t dim = x.shape()[2];
  const std::size_t channels = weight.shape()[0];
  if (dim == 0 || weight.shape()[1] % dim != 0 || bias.shape()[0] != channels) {
    throw std::invalid_argument(fmt::format(
        "conv1d_time: weight {} / bias {} incompatible with input {}",
        shape_string(weight.shape()), shape_string(bias.shape()), shape_string(x.shape())));
  }
  const std::size_t width = weight.shape()[1] / dim;
  if (width == 0 || len < width) {
    throw std::invalid_argument(fmt::format(
        "conv1d_time: sequence length {} is smaller than filter size {}", len, width));
  }
  const std::size_t steps = len - width + 1;
  const std::size_t window = width * dim;
  using StridedMap = Eigen::Map<const RowMatrix, 0, Eigen::OuterStride<>>;

  Tensor out({batch, steps, channels});
  ConstMatMap w(weight.value().data(), channels, window);
  Eigen::Map<const Eigen::RowVectorXd> b(bias.value().data(), channels);
  for (std::size_t i = 0; i < batch; ++i) {
    // Window t is the contiguous run of `window` values starting at row t.
    StridedMap windows(x.value().data() + i * len * dim, steps, window,
                       Eigen::OuterStride<>(dim));
    MatMap o(out.data() + i * steps * channels, steps, channels);
    o.noalias() = windows * w.transpose();
    o.rowwise() += b;
  }
  return make_result(std::move(out), {x, weight, bias},
                     [batch, len, dim, channels, steps, window](Node& self) {
    Node& px = parent(self, 0);
    Node& pw = parent(self, 1);
    Tensor* gx = grad_of(px);
    Tensor* gw = grad_of(pw);
    Tensor* gb = grad_of(parent(self, 2));
    ConstMatMap w(pw.value.data(), channels, window);
    RowMatrix dwin(steps, window);
    for (std::size_t i = 0; i < batch; ++i) {
      ConstMatMap dy(self.grad.data() + i * steps * channels, steps, channels);
      if (gw) {
        StridedMap windows(px.value.data() + i * len * dim, steps, window,
                           Eigen::OuterStride<>(dim));
        MatMap(gw->data(), channels, window).noalias() += dy.transpose() * windows;
      }
      if (gb) {
        Eigen::Map<Eigen::RowVectorXd>(gb->data(), channels) += dy.colwise().sum();
      }
      if (gx) {
        dwin.noalias() = dy * w;
        double* dst = gx->data() + i * len * dim;
        for (std::size_t t = 0; t < steps; ++t) {
          const double* src = dwin.data() + t * window;
          double* row = dst + t * dim;
          for (std::size_t j = 0; j < window; ++j) row[j] += src[j];
        }
      }
    }
  });
}

Var max_over_time(const Var& x) {
  expect_rank(x, 3, "max_over_time");
  const std::size_t batch = x.shape()[0];
  const std::size_t steps = x.shape()[1];
  const std::size_t channels = x.shape()[2];
  if (steps == 0) throw std::invalid_argument("max_over_time: empty time axis");
  Tensor out({batch, channels});
  std::vector<std::size_t> argmax(batch * channels, 0);
  for (std::size_t b = 0; b < batch; ++b) {
    for (std::size_t c = 0; c < channels; ++c) {
      const double* base = x.value().data() + b * steps * channels + c;
      std::size_t best = 0;
      for (std::size_t t = 1; t < steps; ++t) {
        if (base[t * channels] > base[best * channels]) best = t;
      }
      argmax[b * channels + c] = best;
      out[b * channels + c] = base[best * channels];
    }
  }
  return make_result(std::move(out), {x},
                     [argmax = std::move(argmax), steps, channels](Node& self) {
    if (Tensor* g = grad_of(parent(self, 0))) {
      for (std::size_t i = 0; i < argmax.size(); ++i) {
        const std::size_t b = i / channels;
        const std::size_t c = i % channels;
        (*g)[(b * steps + argmax[i]) * channels + c] += self.grad[i];
      }
    }
  });
}

Var mean_over_time(const Var& x) {
  expect_rank(x, 3, "mean_over_time");
  return masked_mean_over_time(x, Tensor({x.shape()[0], x.shape()[1]}, 1.0));
}

Var masked_mean_over_time(const Var& x, const Tensor& mask) {
  expect_rank(x, 3, "masked_mean_over_time");
  const std::size_t batch = x.shape()[0];
  const std::size_t steps = x.shape()[1];
  const std::size_t dim = x.shape()[2];
  if (mask.shape() != Shape{batch, steps}) {
    throw std::invalid_argument(fmt::format("masked_mean_over_time: mask {} for input {}",
                                            shape_string(mask.shape()),
                                            shape_string(x.shape())));
  }
  std::vector<double> inv_count(batch, 0.0);
  for (std::size_t b = 0; b < batch; ++b) {
    double count = 0.0;
    for (std::size_t t = 0; t < steps; ++t) count += mask[b * steps + t] != 0.0 ? 1.0 : 0.0;
    inv_count[b] = count > 0.0 ? 1.0 / count : 0.0;
  }
  Tensor out({batch, dim});
  for (std::size_t b = 0; b < batch; ++b) {
    for (std::size_t t = 0; t < steps; ++t) {
      if (mask[b * steps + t] == 0.0) continue;
      const double* row = x.value().data() + (b * steps + t) * dim;
      for (std::size_t j = 0; j < dim; ++j) out[b * dim + j] += row[j];
    }
    for (std::size_t j = 0; j < dim; ++j) out[b * dim + j] *= inv_count[b];
  }
  return make_result(std::move(out), {x},
                     [mask, inv_count = std::move(inv_count), batch, steps, dim](Node& self) {
    if (Tensor* g = grad_of(parent(self, 0))) {
      for (std::size_t b = 0; b < batch; ++b) {
        for (std::size_t t = 0; t < steps; ++t) {
          if (mask[b * steps + t] == 0.0) continue;
          double* row = g->data() + (b * steps + t) * dim;
          for (std::size_t j = 0; j < dim; ++j) row[j] += self.grad[b * dim + j] * inv_count[b];
        }
      }
    }
  });
}

Var concat_last(std::span<const Var> parts) {
  if (parts.empty()) throw std::invalid_argument("concat_last: no inputs");
  Shape lead = parts[0].shape();
  if (lead.empty()) throw std::invalid_argument("concat_last: scalar input");
  lead.pop_back();
  std::vector<std::size_t> widths;
  std::size_t total = 0;
  for (const Var& p : parts) {
    Shape s = p.shape();
    if (s.empty()) throw std::invalid_argument("concat_last: scalar input");
    widths.push_back(s.back());
    total += s.back();
    s.pop_back();
    if (s != lead) {
      throw std::invalid_argument(fmt::format("concat_last: leading dims {} vs {}",
                                              shape_string(s), shape_string(lead)));
    }
  }
  const std::size_t rows = shape_numel(lead);
  Shape out_shape = lead;
  out_shape.push_back(total);
  Tensor out(out_shape);
  std::size_t offset = 0;
  for (std::size_t p = 0; p < parts.size(); ++p) {
    const double* src = parts[p].value().data();
    for (std::size_t r = 0; r < rows; ++r) {
      std::copy_n(src + r * widths[p], widths[p], out.data() + r * total + offset);
    }
    offset += widths[p];
  }
  return make_result(std::move(out), std::vector<Var>(parts.begin(), parts.end()),
                     [widths = std::move(widths), rows, total](Node& self) {
    std::size_t offset = 0;
    for (std::size_t p = 0; p < widths.size(); ++p) {
      if (Tensor* g = grad_of(parent(self, p))) {
        for (std::size_t r = 0; r < rows; ++r) {
          const double* src = self.grad.data() + r * total + offset;
          double* dst = g->data() + r * widths[p];
          for (std::size_t j = 0; j < widths[p]; ++j) dst[j] += src[j];
        }
      }
      offset += widths[p];
    }
  });
}

Var stack_middle(std::span<const Var> parts) {
  if (parts.empty()) throw std::invalid_argument("stack_middle: no inputs");
  const Shape& first = parts[0].shape();
  if (first.size() != 2) throw std::invalid_argument("stack_middle: inputs must be [B, F]");
  for (const Var& p : parts) {
    if (p.shape() != first) {
      throw std::invalid_argument(fmt::format("stack_middle: shape {} vs {}",
                                              shape_string(p.shape()), shape_string(first)));
    }
  }
  const std::size_t batch = first[0];
  const std::size_t feat = first[1];
  const std::size_t count = parts.size();
  Tensor out({batch, count, feat});
  for (std::size_t e = 0; e < count; ++e) {
    for (std::size_t b = 0; b < batch; ++b) {
      std::copy_n(parts[e].value().data() + b * feat, feat, out.data() + (b * count + e) * feat);
    }
  }
  return make_result(std::move(out), std::vector<Var>(parts.begin(), parts.end()),
                     [batch, count, feat](Node& self) {
    for (std::size_t e = 0; e < count; ++e) {
      if (Tensor* g = grad_of(parent(self, e))) {
        for (std::size_t b = 0; b < batch; ++b) {
          const double* src = self.grad.data() + (b * count + e) * feat;
          double* dst = g->data() + b * feat;
          for (std::size_t j = 0; j < feat; ++j) dst[j] += src[j];
        }
      }
    }
  });
}

Var softmax(const Var& x) {
  if (x.shape().empty()) throw std::invalid_argument("softmax: scalar input");
  const std::size_t n = x.shape().back();
  const std::size_t rows = n == 0 ? 0 : x.value().size() / n;
  Tensor out = x.value();
  for (std::size_t r = 0; r < rows; ++r) {
    double* row = out.data() + r * n;
    const double mx = *std::max_element(row, row + n);
    double total = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      row[j] = std::exp(row[j] - mx);
      total += row[j];
    }
    for (std::size_t j = 0; j < n; ++j) row[j] /= total;
  }
  return make_result(std::move(out), {x}, [rows, n](Node& self) {
    if (Tensor* g = grad_of(parent(self, 0))) {
      for (std::size_t r = 0; r < rows; ++r) {
        const double* y = self.value.data() + r * n;
        const double* dy = self.grad.data() + r * n;
        double dot = 0.0;
        for (std::size_t j = 0; j < n; ++j) dot += dy[j] * y[j];
        for (std::size_t j = 0; j < n; ++j) (*g)[r * n + j] += y[j] * (dy[j] - dot);
      }
    }
  });
}

Var cross_entropy(const Var& logits, const Tensor& labels) {
  expect_rank(logits, 2, "cross_entropy logits");
  const std::size_t batch = logits.shape()[0];
  const std::size_t classes = logits.shape()[1];
  if (labels.size() != batch || batch == 0) {
    throw std::invalid_argument(fmt::format("cross_entropy: {} labels for logits {}",
                                            labels.size(), shape_string(logits.shape())));
  }
  Tensor probs = logits.value();
  double loss = 0.0;
  std::vector<std::size_t> target(batch);
  for (std::size_t b = 0; b < batch; ++b) {
    const double l = labels[b];
    if (!(l >= 0.0) || l >= static_cast<double>(classes) || l != std::floor(l)) {
      throw std::invalid_argument(fmt::format("cross_entropy: label {} outside [0, {})",
                                              l, classes));
    }
    target[b] = static_cast<std::size_t>(l);
    double* row = probs.data() + b * classes;
    const double mx = *std::max_element(row, row + classes);
    double total = 0.0;
    for (std::size_t j = 0; j < classes; ++j) total += std::exp(row[j] - mx);
    const double log_z = mx + std::log(total);
    loss += log_z - row[target[b]];
    for (std::size_t j = 0; j < classes; ++j) row[j] = std::exp(row[j] - log_z);
  }
  loss /= static_cast<double>(batch);
  return make_result(Tensor::scalar(loss), {logits},
                     [probs = std::move(probs), target = std::move(target), batch,
                      classes](Node& self) {
    if (Tensor* g = grad_of(parent(self, 0))) {
      const double upstream = self.grad[0] / static_cast<double>(batch);
      for (std::size_t b = 0; b < batch; ++b) {
        for (std::size_t j = 0; j < classes; ++j) {
          const double indicator = j == target[b] ? 1.0 : 0.0;
          (*g)[b * classes + j] += upstream * (probs[b * classes + j] - indicator);
        }
      }
    }
  });
}

Var dropout(const Var& x, double p, bool training, std::mt19937_64& rng) {
  if (p < 0.0 || p >= 1.0) {
    throw std::invalid_argument(fmt::format("dropout: probability {} outside [0, 1)", p));
  }
  if (!training || p == 0.0) return x;
  std::bernoulli_distribution keep(1.0 - p);
  Tensor mask(x.shape());
  const double factor = 1.0 / (1.0 - p);
  for (double& m : mask.values()) m = keep(rng) ? factor : 0.0;
  Tensor out = x.value();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] *= mask[i];
  return make_result(std::move(out), {x}, [mask = std::move(mask)](Node& self) {
    if (Tensor* g = grad_of(parent(self, 0))) {
      for (std::size_t i = 0; i < g->size(); ++i) (*g)[i] += self.grad[i] * mask[i];
    }
  });
}

Var gradient_reversal(const Var& x, double lambda) {
  if (!(lambda >= 0.0)) {
    throw std::invalid_argument(fmt::format("gradient_reversal: lambda {} must be >= 0",
                                            lambda));
  }
  return make_result(x.value(), {x}, [lambda](Node& self) {
    if (Tensor* g = grad_of(parent(self, 0))) {
      for (std::size_t i = 0; i < g->size(); ++i) (*g)[i] -= lambda * self.grad[i];
    }
  });
}

Var sum_scalars(std::span<const Var> terms) {
  if (terms.empty()) throw std::invalid_argument("sum_scalars: no terms");
  double total = 0.0;
  for (const Var& t : terms) {
    if (t.value().size() != 1) {
      throw std::invalid_argument("sum_scalars: term of shape " + shape_string(t.shape()));
    }
    total += t.value()[0];
  }
  return make_result(Tensor::scalar(total), std::vector<Var>(terms.begin(), terms.end()),
                     [](Node& self) {
    for (std::size_t p = 0; p < self.parents.size(); ++p) {
      if (Tensor* g = grad_of(parent(self, p))) (*g)[0] += self.grad[0];
    }
  });
}

}  // namespace fndkit::ops
