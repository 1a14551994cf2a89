// Copyright 2026 The mammodp Authors
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

#include "mammodp/nn/ops.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numbers>

#include "mammodp/common/errors.hpp"

namespace mammodp::nn {
namespace {

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MapR = Eigen::Map<RowMat>;
using CMapR = Eigen::Map<const RowMat>;
using StridedMap = Eigen::Map<RowMat, 0, Eigen::OuterStride<>>;
using CStridedMap = Eigen::Map<const RowMat, 0, Eigen::OuterStride<>>;

void RequireSameShape(const Tensor& a, const Tensor& b, const char* op) {
  if (a.shape() != b.shape()) {
    throw ContractViolation(std::string(op) + ": shape mismatch " + ShapeString(a.shape()) + " vs " +
                            ShapeString(b.shape()));
  }
}

void RequireRank(const Tensor& t, std::size_t rank, const char* op) {
  if (t.shape().size() != rank) {
    throw ContractViolation(std::string(op) + ": expected rank " + std::to_string(rank) + ", got " +
                            ShapeString(t.shape()));
  }
}

// Accumulates `g` into node `n` if it participates in the gradient.
template <typename F>
void Accumulate(const std::shared_ptr<Node>& n, F&& f) {
  if (n->requires_grad) f(n->EnsureGrad());
}

// Unary elementwise op with derivative expressed through (x, y).
template <typename Fwd, typename Deriv>
Tensor Unary(const Tensor& x, Fwd fwd, Deriv deriv) {
  std::vector<double> y(x.values().size());
  std::transform(x.values().begin(), x.values().end(), y.begin(), fwd);
  auto xn = x.ptr();
  auto yv = std::make_shared<std::vector<double>>(y);
  return MakeResult(x.shape(), std::move(y), {x}, [xn, yv, deriv](Node& self) {
    Accumulate(xn, [&](std::vector<double>& g) {
      for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.grad[i] * deriv(xn->value[i], (*yv)[i]);
    });
  });
}

void Im2Col(const double* x, int channels, int height, int width, int k, int stride, int pad, int out_h,
            int out_w, double* col) {
  const std::size_t plane = static_cast<std::size_t>(out_h) * out_w;
  for (int c = 0; c < channels; ++c) {
    for (int ky = 0; ky < k; ++ky) {
      for (int kx = 0; kx < k; ++kx) {
        double* row = col + ((static_cast<std::size_t>(c) * k + ky) * k + kx) * plane;
        for (int oy = 0; oy < out_h; ++oy) {
          const int iy = oy * stride - pad + ky;
          double* dst = row + static_cast<std::size_t>(oy) * out_w;
          if (iy < 0 || iy >= height) {
            std::fill(dst, dst + out_w, 0.0);
            continue;
          }
          const double* src = x + (static_cast<std::size_t>(c) * height + iy) * width;
          for (int ox = 0; ox < out_w; ++ox) {
            const int ix = ox * stride - pad + kx;
            dst[ox] = (ix >= 0 && ix < width) ? src[ix] : 0.0;
          }
        }
      }
    }
  }
}

void Col2Im(const double* col, int channels, int height, int width, int k, int stride, int pad, int out_h,
            int out_w, double* x) {
  const std::size_t plane = static_cast<std::size_t>(out_h) * out_w;
  for (int c = 0; c < channels; ++c) {
    for (int ky = 0; ky < k; ++ky) {
      for (int kx = 0; kx < k; ++kx) {
        const double* row = col + ((static_cast<std::size_t>(c) * k + ky) * k + kx) * plane;
        for (int oy = 0; oy < out_h; ++oy) {
          const int iy = oy * stride - pad + ky;
          if (iy < 0 || iy >= height) continue;
          double* dst = x + (static_cast<std::size_t>(c) * height + iy) * width;
          const double* src = row + static_cast<std::size_t>(oy) * out_w;
          for (int ox = 0; ox < out_w; ++ox) {
            const int ix = ox * stride - pad + kx;
            if (ix >= 0 && ix < width) dst[ix] += src[ox];
          }
        }
      }
    }
  }
}

}  // namespace

Tensor Add(const Tensor& a, const Tensor& b) {
  RequireSameShape(a, b, "Add");
  std::vector<double> y(a.values().begin(), a.values().end());
  for (std::size_t i = 0; i < y.size(); ++i) y[i] += b.values()[i];
  auto an = a.ptr(), bn = b.ptr();
  return MakeResult(a.shape(), std::move(y), {a, b}, [an, bn](Node& self) {
    for (const auto& n : {an, bn}) {
      Accumulate(n, [&](std::vector<double>& g) {
        for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.grad[i];
      });
    }
  });
}

Tensor Sub(const Tensor& a, const Tensor& b) {
  RequireSameShape(a, b, "Sub");
  std::vector<double> y(a.values().begin(), a.values().end());
  for (std::size_t i = 0; i < y.size(); ++i) y[i] -= b.values()[i];
  auto an = a.ptr(), bn = b.ptr();
  return MakeResult(a.shape(), std::move(y), {a, b}, [an, bn](Node& self) {
    Accumulate(an, [&](std::vector<double>& g) {
      for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.grad[i];
    });
    Accumulate(bn, [&](std::vector<double>& g) {
      for (std::size_t i = 0; i < g.size(); ++i) g[i] -= self.grad[i];
    });
  });
}

Tensor Mul(const Tensor& a, const Tensor& b) {
  RequireSameShape(a, b, "Mul");
  std::vector<double> y(a.values().size());
  for (std::size_t i = 0; i < y.size(); ++i) y[i] = a.values()[i] * b.values()[i];
  auto an = a.ptr(), bn = b.ptr();
  return MakeResult(a.shape(), std::move(y), {a, b}, [an, bn](Node& self) {
    Accumulate(an, [&](std::vector<double>& g) {
      for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.grad[i] * bn->value[i];
    });
    Accumulate(bn, [&](std::vector<double>& g) {
      for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.grad[i] * an->value[i];
    });
  });
}

Tensor Scale(const Tensor& a, double s) {
  return Unary(a, [s](double v) { return v * s; }, [s](double, double) { return s; });
}

Tensor Relu(const Tensor& x) {
  return Unary(x, [](double v) { return v > 0.0 ? v : 0.0; }, [](double v, double) { return v > 0.0 ? 1.0 : 0.0; });
}

Tensor LeakyRelu(const Tensor& x, double slope) {
  return Unary(
      x, [slope](double v) { return v > 0.0 ? v : slope * v; },
      [slope](double v, double) { return v > 0.0 ? 1.0 : slope; });
}

Tensor Tanh(const Tensor& x) {
  return Unary(x, [](double v) { return std::tanh(v); }, [](double, double y) { return 1.0 - y * y; });
}

Tensor Sigmoid(const Tensor& x) {
  return Unary(
      x, [](double v) { return 1.0 / (1.0 + std::exp(-v)); }, [](double, double y) { return y * (1.0 - y); });
}

Tensor Gelu(const Tensor& x) {
  constexpr double kInvSqrt2 = 0.70710678118654752440;
  constexpr double kInvSqrt2Pi = 0.39894228040143267794;
  return Unary(
      x, [](double v) { return 0.5 * v * (1.0 + std::erf(v * kInvSqrt2)); },
      [](double v, double) {
        return 0.5 * (1.0 + std::erf(v * kInvSqrt2)) + v * kInvSqrt2Pi * std::exp(-0.5 * v * v);
      });
}

Tensor Sum(const Tensor& x) {
  double s = 0.0;
  for (double v : x.values()) s += v;
  auto xn = x.ptr();
  return MakeResult({1}, {s}, {x}, [xn](Node& self) {
    Accumulate(xn, [&](std::vector<double>& g) {
      for (double& v : g) v += self.grad[0];
    });
  });
}

Tensor Mean(const Tensor& x) {
  const double n = static_cast<double>(x.numel());
  return Scale(Sum(x), 1.0 / n);
}

Tensor MatMul(const Tensor& a, const Tensor& b) {
  RequireRank(a, 2, "MatMul");
  RequireRank(b, 2, "MatMul");
  const auto n = a.dim(0), k = a.dim(1), m = b.dim(1);
  if (b.dim(0) != k) throw ContractViolation("MatMul: inner dimensions differ");
  std::vector<double> y(static_cast<std::size_t>(n * m));
  MapR(y.data(), n, m).noalias() = CMapR(a.data(), n, k) * CMapR(b.data(), k, m);
  auto an = a.ptr(), bn = b.ptr();
  return MakeResult({n, m}, std::move(y), {a, b}, [an, bn, n, k, m](Node& self) {
    CMapR dy(self.grad.data(), n, m);
    Accumulate(an, [&](std::vector<double>& g) {
      MapR(g.data(), n, k).noalias() += dy * CMapR(bn->value.data(), k, m).transpose();
    });
    Accumulate(bn, [&](std::vector<double>& g) {
      MapR(g.data(), k, m).noalias() += CMapR(an->value.data(), n, k).transpose() * dy;
    });
  });
}

Tensor Linear(const Tensor& x, const Tensor& weight, const Tensor& bias) {
  RequireRank(x, 2, "Linear");
  RequireRank(weight, 2, "Linear");
  const auto n = x.dim(0), in = x.dim(1), out = weight.dim(1);
  if (weight.dim(0) != in) {
    throw ContractViolation("Linear: input width " + std::to_string(in) + " vs weight " +
                            ShapeString(weight.shape()));
  }
  if (bias.defined() && bias.numel() != out) throw ContractViolation("Linear: bias size mismatch");
  std::vector<double> y(static_cast<std::size_t>(n * out));
  MapR ym(y.data(), n, out);
  ym.noalias() = CMapR(x.data(), n, in) * CMapR(weight.data(), in, out);
  if (bias.defined()) ym.rowwise() += Eigen::Map<const Eigen::RowVectorXd>(bias.data(), out);
  auto xn = x.ptr(), wn = weight.ptr();
  auto bn = bias.defined() ? bias.ptr() : nullptr;
  return MakeResult({n, out}, std::move(y), {x, weight, bias}, [xn, wn, bn, n, in, out](Node& self) {
    CMapR dy(self.grad.data(), n, out);
    Accumulate(xn, [&](std::vector<double>& g) {
      MapR(g.data(), n, in).noalias() += dy * CMapR(wn->value.data(), in, out).transpose();
    });
    Accumulate(wn, [&](std::vector<double>& g) {
      MapR(g.data(), in, out).noalias() += CMapR(xn->value.data(), n, in).transpose() * dy;
    });
    if (bn) {
      Accumulate(bn, [&](std::vector<double>& g) {
        for (std::int64_t r = 0; r < n; ++r)
          for (std::int64_t j = 0; j < out; ++j) g[j] += dy(r, j);
      });
    }
  });
}

Tensor Reshape(const Tensor& x, Shape shape) {
  if (Numel(shape) != x.numel()) {
    throw ContractViolation("Reshape: " + ShapeString(x.shape()) + " -> " + ShapeString(shape));
  }
  std::vector<double> y(x.values().begin(), x.values().end());
  auto xn = x.ptr();
  return MakeResult(std::move(shape), std::move(y), {x}, [xn](Node& self) {
    Accumulate(xn, [&](std::vector<double>& g) {
      for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.grad[i];
    });
  });
}

Tensor GatherRows(const Tensor& x, std::vector<std::int64_t> idx) {
  RequireRank(x, 2, "GatherRows");
  const auto n = x.dim(0), d = x.dim(1);
  const auto m = static_cast<std::int64_t>(idx.size());
  std::vector<double> y(static_cast<std::size_t>(m * d));
  for (std::int64_t i = 0; i < m; ++i) {
    if (idx[i] < 0 || idx[i] >= n) throw ContractViolation("GatherRows: index out of range");
    std::copy_n(x.data() + idx[i] * d, d, y.data() + i * d);
  }
  auto xn = x.ptr();
  auto shared_idx = std::make_shared<std::vector<std::int64_t>>(std::move(idx));
  return MakeResult({m, d}, std::move(y), {x}, [xn, shared_idx, d](Node& self) {
    Accumulate(xn, [&](std::vector<double>& g) {
      const auto& ix = *shared_idx;
      for (std::size_t i = 0; i < ix.size(); ++i) {
        const double* src = self.grad.data() + i * d;
        double* dst = g.data() + ix[i] * d;
        for (std::int64_t j = 0; j < d; ++j) dst[j] += src[j];
      }
    });
  });
}

Tensor ConcatCols(const Tensor& a, const Tensor& b) {
  RequireRank(a, 2, "ConcatCols");
  RequireRank(b, 2, "ConcatCols");
  const auto n = a.dim(0), da = a.dim(1), db = b.dim(1);
  if (b.dim(0) != n) throw ContractViolation("ConcatCols: row counts differ");
  std::vector<double> y(static_cast<std::size_t>(n * (da + db)));
  for (std::int64_t i = 0; i < n; ++i) {
    std::copy_n(a.data() + i * da, da, y.data() + i * (da + db));
    std::copy_n(b.data() + i * db, db, y.data() + i * (da + db) + da);
  }
  auto an = a.ptr(), bn = b.ptr();
  return MakeResult({n, da + db}, std::move(y), {a, b}, [an, bn, n, da, db](Node& self) {
    Accumulate(an, [&](std::vector<double>& g) {
      for (std::int64_t i = 0; i < n; ++i)
        for (std::int64_t j = 0; j < da; ++j) g[i * da + j] += self.grad[i * (da + db) + j];
    });
    Accumulate(bn, [&](std::vector<double>& g) {
      for (std::int64_t i = 0; i < n; ++i)
        for (std::int64_t j = 0; j < db; ++j) g[i * db + j] += self.grad[i * (da + db) + da + j];
    });
  });
}

Tensor ConcatChannels(const Tensor& a, const Tensor& b) {
  RequireRank(a, 4, "ConcatChannels");
  RequireRank(b, 4, "ConcatChannels");
  const auto n = a.dim(0);
  if (b.dim(0) != n || a.dim(2) != b.dim(2) || a.dim(3) != b.dim(3)) {
    throw ContractViolation("ConcatChannels: incompatible shapes");
  }
  const auto sa = a.dim(1) * a.dim(2) * a.dim(3);
  const auto sb = b.dim(1) * b.dim(2) * b.dim(3);
  std::vector<double> y(static_cast<std::size_t>(n * (sa + sb)));
  for (std::int64_t i = 0; i < n; ++i) {
    std::copy_n(a.data() + i * sa, sa, y.data() + i * (sa + sb));
    std::copy_n(b.data() + i * sb, sb, y.data() + i * (sa + sb) + sa);
  }
  auto an = a.ptr(), bn = b.ptr();
  return MakeResult({n, a.dim(1) + b.dim(1), a.dim(2), a.dim(3)}, std::move(y), {a, b},
                    [an, bn, n, sa, sb](Node& self) {
                      Accumulate(an, [&](std::vector<double>& g) {
                        for (std::int64_t i = 0; i < n; ++i)
                          for (std::int64_t j = 0; j < sa; ++j) g[i * sa + j] += self.grad[i * (sa + sb) + j];
                      });
                      Accumulate(bn, [&](std::vector<double>& g) {
                        for (std::int64_t i = 0; i < n; ++i)
                          for (std::int64_t j = 0; j < sb; ++j)
                            g[i * sb + j] += self.grad[i * (sa + sb) + sa + j];
                      });
                    });
}

Tensor GroupMeanRows(const Tensor& x, std::int64_t batch) {
  RequireRank(x, 2, "GroupMeanRows");
  if (batch <= 0 || x.dim(0) % batch != 0) throw ContractViolation("GroupMeanRows: rows not divisible by batch");
  const auto group = x.dim(0) / batch, d = x.dim(1);
  std::vector<double> y(static_cast<std::size_t>(batch * d), 0.0);
  for (std::int64_t b = 0; b < batch; ++b)
    for (std::int64_t r = 0; r < group; ++r)
      for (std::int64_t j = 0; j < d; ++j) y[b * d + j] += x.data()[(b * group + r) * d + j];
  for (double& v : y) v /= static_cast<double>(group);
  auto xn = x.ptr();
  return MakeResult({batch, d}, std::move(y), {x}, [xn, batch, group, d](Node& self) {
    Accumulate(xn, [&](std::vector<double>& g) {
      const double inv = 1.0 / static_cast<double>(group);
      for (std::int64_t b = 0; b < batch; ++b)
        for (std::int64_t r = 0; r < group; ++r)
          for (std::int64_t j = 0; j < d; ++j) g[(b * group + r) * d + j] += self.grad[b * d + j] * inv;
    });
  });
}

Tensor Conv2d(const Tensor& x, const Tensor& weight, const Tensor& bias, int stride, int padding) {
  RequireRank(x, 4, "Conv2d");
  RequireRank(weight, 4, "Conv2d");
  const int n = static_cast<int>(x.dim(0)), cin = static_cast<int>(x.dim(1));
  const int h = static_cast<int>(x.dim(2)), w = static_cast<int>(x.dim(3));
  const int cout = static_cast<int>(weight.dim(0)), k = static_cast<int>(weight.dim(2));
  if (weight.dim(1) != cin || weight.dim(3) != k) {
    throw ContractViolation("Conv2d: weight " + ShapeString(weight.shape()) + " vs input " + ShapeString(x.shape()));
  }
  const int oh = (h + 2 * padding - k) / stride + 1;
  const int ow = (w + 2 * padding - k) / stride + 1;
  if (oh <= 0 || ow <= 0) throw ContractViolation("Conv2d: empty output");
  const std::int64_t kk = static_cast<std::int64_t>(cin) * k * k;
  const std::int64_t l = static_cast<std::int64_t>(oh) * ow;
  // One image's columns at a time; backward rebuilds them instead of keeping
  // the whole batch alive.
  std::vector<double> col_buffer(static_cast<std::size_t>(kk * l));
  std::vector<double> y(static_cast<std::size_t>(n) * cout * l);
  CMapR wm(weight.data(), cout, kk);
  const std::int64_t in_step = static_cast<std::int64_t>(cin) * h * w;
  for (int i = 0; i < n; ++i) {
    double* col = col_buffer.data();
    Im2Col(x.data() + i * in_step, cin, h, w, k, stride, padding, oh, ow, col);
    MapR ym(y.data() + static_cast<std::int64_t>(i) * cout * l, cout, l);
    ym.noalias() = wm * CMapR(col, kk, l);
    if (bias.defined()) ym.colwise() += Eigen::Map<const Eigen::VectorXd>(bias.data(), cout);
  }
  auto xn = x.ptr(), wn = weight.ptr();
  auto bn = bias.defined() ? bias.ptr() : nullptr;
  return MakeResult({n, cout, oh, ow}, std::move(y), {x, weight, bias},
                    [=](Node& self) {
                      CMapR wmat(wn->value.data(), cout, kk);
                      std::vector<double> dcol(static_cast<std::size_t>(kk * l));
                      std::vector<double> col;
                      for (int i = 0; i < n; ++i) {
                        CMapR dy(self.grad.data() + static_cast<std::int64_t>(i) * cout * l, cout, l);
                        if (wn->requires_grad) {
                          col.resize(static_cast<std::size_t>(kk * l));
                          Im2Col(xn->value.data() + i * in_step, cin, h, w, k, stride, padding, oh, ow, col.data());
                          Accumulate(wn, [&](std::vector<double>& g) {
                            MapR(g.data(), cout, kk).noalias() += dy * CMapR(col.data(), kk, l).transpose();
                          });
                        }
                        if (bn) {
                          Accumulate(bn, [&](std::vector<double>& g) {
                            for (std::int64_t o = 0; o < cout; ++o) {
                              double total = 0.0;
                              for (std::int64_t j = 0; j < l; ++j) total += dy(o, j);
                              g[o] += total;
                            }
                          });
                        }
                        if (xn->requires_grad) {
                          MapR(dcol.data(), kk, l).noalias() = wmat.transpose() * dy;
                          Col2Im(dcol.data(), cin, h, w, k, stride, padding, oh, ow,
                                 xn->EnsureGrad().data() + i * in_step);
                        }
                      }
                    });
}

Tensor ConvTranspose2d(const Tensor& x, const Tensor& weight, const Tensor& bias, int stride, int padding) {
  RequireRank(x, 4, "ConvTranspose2d");
  RequireRank(weight, 4, "ConvTranspose2d");
  const int n = static_cast<int>(x.dim(0)), cin = static_cast<int>(x.dim(1));
  const int h = static_cast<int>(x.dim(2)), w = static_cast<int>(x.dim(3));
  const int cout = static_cast<int>(weight.dim(1)), k = static_cast<int>(weight.dim(2));
  if (weight.dim(0) != cin || weight.dim(3) != k) {
    throw ContractViolation("ConvTranspose2d: weight " + ShapeString(weight.shape()) + " vs input " +
                            ShapeString(x.shape()));
  }
  const int oh = (h - 1) * stride - 2 * padding + k;
  const int ow = (w - 1) * stride - 2 * padding + k;
  if (oh <= 0 || ow <= 0) throw ContractViolation("ConvTranspose2d: empty output");
  const std::int64_t kk = static_cast<std::int64_t>(cout) * k * k;
  const std::int64_t l = static_cast<std::int64_t>(h) * w;
  const std::int64_t out_step = static_cast<std::int64_t>(cout) * oh * ow;
  std::vector<double> y(static_cast<std::size_t>(n * out_step), 0.0);
  std::vector<double> col(static_cast<std::size_t>(kk * l));
  CMapR wm(weight.data(), cin, kk);
  for (int i = 0; i < n; ++i) {
    MapR(col.data(), kk, l).noalias() = wm.transpose() * CMapR(x.data() + i * cin * l, cin, l);
    double* yo = y.data() + i * out_step;
    Col2Im(col.data(), cout, oh, ow, k, stride, padding, h, w, yo);
    if (bias.defined()) {
      for (int c = 0; c < cout; ++c) {
        double* plane = yo + static_cast<std::int64_t>(c) * oh * ow;
        for (int j = 0; j < oh * ow; ++j) plane[j] += bias.data()[c];
      }
    }
  }
  auto xn = x.ptr(), wn = weight.ptr();
  auto bn = bias.defined() ? bias.ptr() : nullptr;
  return MakeResult({n, cout, oh, ow}, std::move(y), {x, weight, bias}, [=](Node& self) {
    std::vector<double> dcol(static_cast<std::size_t>(kk * l));
    CMapR wmat(wn->value.data(), cin, kk);
    for (int i = 0; i < n; ++i) {
      const double* dy = self.grad.data() + i * out_step;
      Im2Col(dy, cout, oh, ow, k, stride, padding, h, w, dcol.data());
      CMapR dc(dcol.data(), kk, l);
      Accumulate(wn, [&](std::vector<double>& g) {
        MapR(g.data(), cin, kk).noalias() += CMapR(xn->value.data() + i * cin * l, cin, l) * dc.transpose();
      });
      Accumulate(xn, [&](std::vector<double>& g) {
        MapR(g.data() + i * cin * l, cin, l).noalias() += wmat * dc;
      });
      if (bn) {
        Accumulate(bn, [&](std::vector<double>& g) {
          for (int c = 0; c < cout; ++c) {
            const double* plane = dy + static_cast<std::int64_t>(c) * oh * ow;
            double s = 0.0;
            for (int j = 0; j < oh * ow; ++j) s += plane[j];
            g[c] += s;
          }
        });
      }
    }
  });
}

Tensor BatchNorm2d(const Tensor& x, const Tensor& gamma, const Tensor& beta, BatchNormStats& stats, bool training) {
  if (x.shape().size() != 4 && x.shape().size() != 2) throw ContractViolation("BatchNorm2d: expected rank 4 or 2");
  const std::int64_t n = x.dim(0), c = x.dim(1);
  const std::int64_t hw = x.shape().size() == 4 ? x.dim(2) * x.dim(3) : 1;
  if (gamma.numel() != c || beta.numel() != c) throw ContractViolation("BatchNorm2d: affine size mismatch");
  if (static_cast<std::int64_t>(stats.running_mean.size()) != c) {
    stats.running_mean.assign(c, 0.0);
    stats.running_var.assign(c, 1.0);
  }
  const double m = static_cast<double>(n * hw);
  auto xhat = std::make_shared<std::vector<double>>(x.values().size());
  auto invstd = std::make_shared<std::vector<double>>(c);
  std::vector<double> y(x.values().size());
  for (std::int64_t ch = 0; ch < c; ++ch) {
    double mean = 0.0, var = 0.0;
    if (training) {
      for (std::int64_t i = 0; i < n; ++i) {
        const double* p = x.data() + (i * c + ch) * hw;
        for (std::int64_t j = 0; j < hw; ++j) mean += p[j];
      }
      mean /= m;
      for (std::int64_t i = 0; i < n; ++i) {
        const double* p = x.data() + (i * c + ch) * hw;
        for (std::int64_t j = 0; j < hw; ++j) var += (p[j] - mean) * (p[j] - mean);
      }
      var /= m;
      const double unbiased = m > 1.0 ? var * m / (m - 1.0) : var;
      stats.running_mean[ch] = (1.0 - stats.momentum) * stats.running_mean[ch] + stats.momentum * mean;
      stats.running_var[ch] = (1.0 - stats.momentum) * stats.running_var[ch] + stats.momentum * unbiased;
    } else {
      mean = stats.running_mean[ch];
      var = stats.running_var[ch];
    }
    const double is = 1.0 / std::sqrt(var + stats.eps);
    (*invstd)[ch] = is;
    for (std::int64_t i = 0; i < n; ++i) {
      const std::int64_t base = (i * c + ch) * hw;
      for (std::int64_t j = 0; j < hw; ++j) {
        const double xh = (x.data()[base + j] - mean) * is;
        (*xhat)[base + j] = xh;
        y[base + j] = gamma.data()[ch] * xh + beta.data()[ch];
      }
    }
  }
  auto xn = x.ptr(), gn = gamma.ptr(), bn = beta.ptr();
  return MakeResult(x.shape(), std::move(y), {x, gamma, beta}, [=](Node& self) {
    for (std::int64_t ch = 0; ch < c; ++ch) {
      double sum_dy = 0.0, sum_dy_xhat = 0.0;
      for (std::int64_t i = 0; i < n; ++i) {
        const std::int64_t base = (i * c + ch) * hw;
        for (std::int64_t j = 0; j < hw; ++j) {
          sum_dy += self.grad[base + j];
          sum_dy_xhat += self.grad[base + j] * (*xhat)[base + j];
        }
      }
      Accumulate(gn, [&](std::vector<double>& g) { g[ch] += sum_dy_xhat; });
      Accumulate(bn, [&](std::vector<double>& g) { g[ch] += sum_dy; });
      Accumulate(xn, [&](std::vector<double>& g) {
        const double gam = gn->value[ch];
        const double is = (*invstd)[ch];
        for (std::int64_t i = 0; i < n; ++i) {
          const std::int64_t base = (i * c + ch) * hw;
          for (std::int64_t j = 0; j < hw; ++j) {
            const double dy = self.grad[base + j];
            if (training) {
              g[base + j] += gam * is * (dy - sum_dy / m - (*xhat)[base + j] * sum_dy_xhat / m);
            } else {
              g[base + j] += gam * is * dy;
            }
          }
        }
      });
    }
  });
}

Tensor LayerNorm(const Tensor& x, const Tensor& gamma, const Tensor& beta, double eps) {
  RequireRank(x, 2, "LayerNorm");
  const std::int64_t n = x.dim(0), d = x.dim(1);
  if (gamma.numel() != d || beta.numel() != d) throw ContractViolation("LayerNorm: affine size mismatch");
  auto xhat = std::make_shared<std::vector<double>>(x.values().size());
  auto invstd = std::make_shared<std::vector<double>>(n);
  std::vector<double> y(x.values().size());
  for (std::int64_t i = 0; i < n; ++i) {
    const double* row = x.data() + i * d;
    double mean = 0.0;
    for (std::int64_t j = 0; j < d; ++j) mean += row[j];
    mean /= static_cast<double>(d);
    double var = 0.0;
    for (std::int64_t j = 0; j < d; ++j) var += (row[j] - mean) * (row[j] - mean);
    var /= static_cast<double>(d);
    const double is = 1.0 / std::sqrt(var + eps);
    (*invstd)[i] = is;
    for (std::int64_t j = 0; j < d; ++j) {
      const double xh = (row[j] - mean) * is;
      (*xhat)[i * d + j] = xh;
      y[i * d + j] = xh * gamma.data()[j] + beta.data()[j];
    }
  }
  auto xn = x.ptr(), gn = gamma.ptr(), bn = beta.ptr();
  return MakeResult(x.shape(), std::move(y), {x, gamma, beta}, [=](Node& self) {
    Accumulate(gn, [&](std::vector<double>& g) {
      for (std::int64_t i = 0; i < n; ++i)
        for (std::int64_t j = 0; j < d; ++j) g[j] += self.grad[i * d + j] * (*xhat)[i * d + j];
    });
    Accumulate(bn, [&](std::vector<double>& g) {
      for (std::int64_t i = 0; i < n; ++i)
        for (std::int64_t j = 0; j < d; ++j) g[j] += self.grad[i * d + j];
    });
    Accumulate(xn, [&](std::vector<double>& g) {
      const double dd = static_cast<double>(d);
      for (std::int64_t i = 0; i < n; ++i) {
        double sum_dxh = 0.0, sum_dxh_xh = 0.0;
        for (std::int64_t j = 0; j < d; ++j) {
          const double dxh = self.grad[i * d + j] * gn->value[j];
          sum_dxh += dxh;
          sum_dxh_xh += dxh * (*xhat)[i * d + j];
        }
        const double is = (*invstd)[i];
        for (std::int64_t j = 0; j < d; ++j) {
          const double dxh = self.grad[i * d + j] * gn->value[j];
          g[i * d + j] += is / dd * (dd * dxh - sum_dxh - (*xhat)[i * d + j] * sum_dxh_xh);
        }
      }
    });
  });
}

Tensor WindowAttention(const Tensor& qkv, int heads, int tokens, const Tensor& bias_table,
                       const std::vector<std::int32_t>& bias_index, const std::vector<double>& mask,
                       int windows_per_image) {
  RequireRank(qkv, 2, "WindowAttention");
  const std::int64_t rows = qkv.dim(0), c3 = qkv.dim(1);
  if (c3 % 3 != 0 || (c3 / 3) % heads != 0 || rows % tokens != 0) {
    throw ContractViolation("WindowAttention: incompatible qkv shape " + ShapeString(qkv.shape()));
  }
  if (static_cast<std::int64_t>(bias_index.size()) != static_cast<std::int64_t>(tokens) * tokens) {
    throw ContractViolation("WindowAttention: bias index size mismatch");
  }
  const std::int64_t c = c3 / 3, hd = c / heads, windows = rows / tokens;
  const std::int64_t tt = static_cast<std::int64_t>(tokens) * tokens;
  if (!mask.empty() && static_cast<std::int64_t>(mask.size()) != windows_per_image * tt) {
    throw ContractViolation("WindowAttention: mask size mismatch");
  }
  const double scale = 1.0 / std::sqrt(static_cast<double>(hd));
  auto probs = std::make_shared<std::vector<double>>(static_cast<std::size_t>(windows * heads * tt));
  std::vector<double> out(static_cast<std::size_t>(rows * c));
  RowMat s(tokens, tokens);
  for (std::int64_t w = 0; w < windows; ++w) {
    const double* base = qkv.data() + w * tokens * c3;
    const double* wmask = mask.empty() ? nullptr : mask.data() + (w % windows_per_image) * tt;
    for (int h = 0; h < heads; ++h) {
      CStridedMap q(base + h * hd, tokens, hd, Eigen::OuterStride<>(c3));
      CStridedMap k(base + c + h * hd, tokens, hd, Eigen::OuterStride<>(c3));
      CStridedMap v(base + 2 * c + h * hd, tokens, hd, Eigen::OuterStride<>(c3));
      s.noalias() = scale * q * k.transpose();
      MapR p(probs->data() + (w * heads + h) * tt, tokens, tokens);
      for (int i = 0; i < tokens; ++i) {
        double mx = -std::numeric_limits<double>::infinity();
        for (int j = 0; j < tokens; ++j) {
          double val = s(i, j) + bias_table.data()[bias_index[i * tokens + j] * heads + h];
          if (wmask) val += wmask[i * tokens + j];
          s(i, j) = val;
          mx = std::max(mx, val);
        }
        double z = 0.0;
        for (int j = 0; j < tokens; ++j) {
          p(i, j) = std::exp(s(i, j) - mx);
          z += p(i, j);
        }
        p.row(i) /= z;
      }
      StridedMap o(out.data() + w * tokens * c + h * hd, tokens, hd, Eigen::OuterStride<>(c));
      o.noalias() = p * v;
    }
  }
  auto qn = qkv.ptr(), tn = bias_table.ptr();
  auto index = std::make_shared<std::vector<std::int32_t>>(bias_index);
  return MakeResult({rows, c}, std::move(out), {qkv, bias_table}, [=](Node& self) {
    RowMat dp(tokens, tokens), ds(tokens, tokens);
    std::vector<double>* gq = qn->requires_grad ? &qn->EnsureGrad() : nullptr;
    std::vector<double>* gt = tn->requires_grad ? &tn->EnsureGrad() : nullptr;
    for (std::int64_t w = 0; w < windows; ++w) {
      const double* base = qn->value.data() + w * tokens * c3;
      for (int h = 0; h < heads; ++h) {
        CStridedMap q(base + h * hd, tokens, hd, Eigen::OuterStride<>(c3));
        CStridedMap k(base + c + h * hd, tokens, hd, Eigen::OuterStride<>(c3));
        CStridedMap v(base + 2 * c + h * hd, tokens, hd, Eigen::OuterStride<>(c3));
        CStridedMap dout(self.grad.data() + w * tokens * c + h * hd, tokens, hd, Eigen::OuterStride<>(c));
        CMapR p(probs->data() + (w * heads + h) * tt, tokens, tokens);
        dp.noalias() = dout * v.transpose();
        for (int i = 0; i < tokens; ++i) {
          double dot = 0.0;
          for (int j = 0; j < tokens; ++j) dot += p(i, j) * dp(i, j);
          for (int j = 0; j < tokens; ++j) ds(i, j) = p(i, j) * (dp(i, j) - dot);
        }
        if (gt) {
          for (int i = 0; i < tokens; ++i)
            for (int j = 0; j < tokens; ++j) (*gt)[(*index)[i * tokens + j] * heads + h] += ds(i, j);
        }
        if (gq) {
          double* gbase = gq->data() + w * tokens * c3;
          StridedMap dq(gbase + h * hd, tokens, hd, Eigen::OuterStride<>(c3));
          StridedMap dk(gbase + c + h * hd, tokens, hd, Eigen::OuterStride<>(c3));
          StridedMap dv(gbase + 2 * c + h * hd, tokens, hd, Eigen::OuterStride<>(c3));
          dq.noalias() += scale * ds * k;
          dk.noalias() += scale * ds.transpose() * q;
          dv.noalias() += p.transpose() * dout;
        }
      }
    }
  });
}

Tensor SmoothedCrossEntropy(const Tensor& logits, std::span<const int> labels, double smoothing) {
  RequireRank(logits, 2, "SmoothedCrossEntropy");
  const std::int64_t b = logits.dim(0), k = logits.dim(1);
  if (static_cast<std::int64_t>(labels.size()) != b) throw ContractViolation("SmoothedCrossEntropy: label count");
  if (smoothing < 0.0 || smoothing >= 1.0) throw ContractViolation("SmoothedCrossEntropy: smoothing in [0,1)");
  auto dlogits = std::make_shared<std::vector<double>>(static_cast<std::size_t>(b * k));
  double loss = 0.0;
  for (std::int64_t i = 0; i < b; ++i) {
    const double* row = logits.data() + i * k;
    const double mx = *std::max_element(row, row + k);
    double z = 0.0;
    for (std::int64_t j = 0; j < k; ++j) z += std::exp(row[j] - mx);
    const double log_z = mx + std::log(z);
    if (labels[i] < 0 || labels[i] >= k) throw ContractViolation("SmoothedCrossEntropy: label out of range");
    for (std::int64_t j = 0; j < k; ++j) {
      const double target = (j == labels[i] ? 1.0 - smoothing : 0.0) + smoothing / static_cast<double>(k);
      const double log_p = row[j] - log_z;
      loss -= target * log_p;
      (*dlogits)[i * k + j] = (std::exp(log_p) - target) / static_cast<double>(b);
    }
  }
  loss /= static_cast<double>(b);
  auto ln = logits.ptr();
  return MakeResult({1}, {loss}, {logits}, [ln, dlogits](Node& self) {
    Accumulate(ln, [&](std::vector<double>& g) {
      for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.grad[0] * (*dlogits)[i];
    });
  });
}

}  // namespace mammodp::nn
