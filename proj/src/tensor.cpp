#include "liir/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

namespace liir::ad {

namespace {

void check_finite(const Node& n) {
    for (double v : n.values) {
        if (!std::isfinite(v)) {
            throw NumericError(std::string("non-finite value in ") + n.op);
        }
    }
}

void require_2d(const Var& v, const char* op) {
    if (v.shape().size() != 2) {
        throw ShapeError(std::string(op) + ": expected 2D tensor, got " +
                         shape_str(v.shape()));
    }
}

void require_same_shape(const Var& a, const Var& b, const char* op) {
    if (a.shape() != b.shape()) {
        throw ShapeError(std::string(op) + ": shape mismatch " +
                         shape_str(a.shape()) + " vs " + shape_str(b.shape()));
    }
}

void require_same_tape(const Var& a, const Var& b, const char* op) {
    if (a.tape != b.tape) {
        throw ContractError(std::string(op) + ": operands from different tapes");
    }
}

// Appends a node and returns its handle; backward_fn is attached afterwards
// so it can capture stable pointers to both output and inputs.
Var make_node(Tape& tape, const char* op, Shape shape, std::vector<double> values,
              std::vector<int> inputs, bool requires_grad) {
    auto n = std::make_unique<Node>();
    n->shape = std::move(shape);
    n->values = std::move(values);
    n->requires_grad = requires_grad;
    n->op = op;
    n->inputs = std::move(inputs);
    check_finite(*n);
    const int id = tape.append(std::move(n));
    return Var{&tape, id};
}

}  // namespace

std::int64_t numel(const Shape& shape) {
    return std::accumulate(shape.begin(), shape.end(), std::int64_t{1},
                           std::multiplies<>());
}

std::string shape_str(const Shape& shape) {
    std::ostringstream os;
    os << "(";
    for (std::size_t i = 0; i < shape.size(); ++i) {
        if (i) os << ",";
        os << shape[i];
    }
    os << ")";
    return os.str();
}

double Var::scalar() const {
    if (numel(shape()) != 1) {
        throw ContractError("scalar() on tensor of shape " + shape_str(shape()));
    }
    return values()[0];
}

void Tape::backward(int loss_id) {
    Node& loss = node(loss_id);
    if (numel(loss.shape) != 1) {
        throw ContractError("backward: loss must be scalar, got shape " +
                            shape_str(loss.shape));
    }
    if (!loss.requires_grad) return;  // nothing upstream requires grad
    loss.ensure_grad();
    loss.grad[0] += 1.0;
    // Creation order is topological, so one reverse sweep suffices and each
    // node's backward runs exactly once.
    for (int id = loss_id; id >= 0; --id) {
        Node& n = node(id);
        if (!n.requires_grad || n.grad.empty()) continue;
        if (n.backward_fn) n.backward_fn();
    }
}

Var leaf(Tape& tape, Shape shape, std::vector<double> values, bool requires_grad) {
    if (static_cast<std::int64_t>(values.size()) != numel(shape)) {
        throw ShapeError("leaf: values length " + std::to_string(values.size()) +
                         " does not match shape " + shape_str(shape));
    }
    return make_node(tape, "leaf", std::move(shape), std::move(values), {},
                     requires_grad);
}

Var constant(Tape& tape, Shape shape, std::vector<double> values) {
    return leaf(tape, std::move(shape), std::move(values), false);
}

Var scalar_const(Tape& tape, double v) { return constant(tape, {1}, {v}); }

Var add(Var a, Var b) {
    require_same_tape(a, b, "add");
    require_same_shape(a, b, "add");
    const auto& av = a.values();
    const auto& bv = b.values();
    std::vector<double> out(av.size());
    for (std::size_t i = 0; i < av.size(); ++i) out[i] = av[i] + bv[i];
    Var o = make_node(*a.tape, "add", a.shape(), std::move(out), {a.id, b.id},
                      a.requires_grad() || b.requires_grad());
    Node* on = &o.n();
    Node* an = &a.n();
    Node* bn = &b.n();
    on->backward_fn = [on, an, bn] {
        if (an->requires_grad) {
            an->ensure_grad();
            for (std::size_t i = 0; i < on->grad.size(); ++i) an->grad[i] += on->grad[i];
        }
        if (bn->requires_grad) {
            bn->ensure_grad();
            for (std::size_t i = 0; i < on->grad.size(); ++i) bn->grad[i] += on->grad[i];
        }
    };
    return o;
}

Var sub(Var a, Var b) {
    require_same_tape(a, b, "sub");
    require_same_shape(a, b, "sub");
    const auto& av = a.values();
    const auto& bv = b.values();
    std::vector<double> out(av.size());
    for (std::size_t i = 0; i < av.size(); ++i) out[i] = av[i] - bv[i];
    Var o = make_node(*a.tape, "sub", a.shape(), std::move(out), {a.id, b.id},
                      a.requires_grad() || b.requires_grad());
    Node* on = &o.n();
    Node* an = &a.n();
    Node* bn = &b.n();
    on->backward_fn = [on, an, bn] {
        if (an->requires_grad) {
            an->ensure_grad();
            for (std::size_t i = 0; i < on->grad.size(); ++i) an->grad[i] += on->grad[i];
        }
        if (bn->requires_grad) {
            bn->ensure_grad();
            for (std::size_t i = 0; i < on->grad.size(); ++i) bn->grad[i] -= on->grad[i];
        }
    };
    return o;
}

Var mul(Var a, Var b) {
    require_same_tape(a, b, "mul");
    require_same_shape(a, b, "mul");
    const auto& av = a.values();
    const auto& bv = b.values();
    std::vector<double> out(av.size());
    for (std::size_t i = 0; i < av.size(); ++i) out[i] = av[i] * bv[i];
    Var o = make_node(*a.tape, "mul", a.shape(), std::move(out), {a.id, b.id},
                      a.requires_grad() || b.requires_grad());
    Node* on = &o.n();
    Node* an = &a.n();
    Node* bn = &b.n();
    on->backward_fn = [on, an, bn] {
        if (an->requires_grad) {
            an->ensure_grad();
            for (std::size_t i = 0; i < on->grad.size(); ++i)
                an->grad[i] += on->grad[i] * bn->values[i];
        }
        if (bn->requires_grad) {
            bn->ensure_grad();
            for (std::size_t i = 0; i < on->grad.size(); ++i)
                bn->grad[i] += on->grad[i] * an->values[i];
        }
    };
    return o;
}

Var scale(Var a, double c) {
    if (!std::isfinite(c)) throw NumericError("scale: non-finite factor");
    const auto& av = a.values();
    std::vector<double> out(av.size());
    for (std::size_t i = 0; i < av.size(); ++i) out[i] = av[i] * c;
    Var o = make_node(*a.tape, "scale", a.shape(), std::move(out), {a.id},
                      a.requires_grad());
    Node* on = &o.n();
    Node* an = &a.n();
    on->backward_fn = [on, an, c] {
        if (!an->requires_grad) return;
        an->ensure_grad();
        for (std::size_t i = 0; i < on->grad.size(); ++i) an->grad[i] += c * on->grad[i];
    };
    return o;
}

Var matmul(Var a, Var b) {
    require_same_tape(a, b, "matmul");
    require_2d(a, "matmul");
    require_2d(b, "matmul");
    const std::int64_t n = a.shape()[0], k = a.shape()[1];
    const std::int64_t k2 = b.shape()[0], m = b.shape()[1];
    if (k != k2) {
        throw ShapeError("matmul: inner dimensions differ, " + shape_str(a.shape()) +
                         " x " + shape_str(b.shape()));
    }
    const auto& av = a.values();
    const auto& bv = b.values();
    std::vector<double> out(static_cast<std::size_t>(n * m), 0.0);
    for (std::int64_t i = 0; i < n; ++i) {
        for (std::int64_t l = 0; l < k; ++l) {
            const double x = av[static_cast<std::size_t>(i * k + l)];
            if (x == 0.0) continue;
            const std::size_t brow = static_cast<std::size_t>(l * m);
            const std::size_t orow = static_cast<std::size_t>(i * m);
            for (std::int64_t j = 0; j < m; ++j) out[orow + j] += x * bv[brow + j];
        }
    }
    Var o = make_node(*a.tape, "matmul", {n, m}, std::move(out), {a.id, b.id},
                      a.requires_grad() || b.requires_grad());
    Node* on = &o.n();
    Node* an = &a.n();
    Node* bn = &b.n();
    on->backward_fn = [on, an, bn, n, k, m] {
        const auto& g = on->grad;
        if (an->requires_grad) {
            an->ensure_grad();
            // ga = g * b^T
            for (std::int64_t i = 0; i < n; ++i) {
                for (std::int64_t l = 0; l < k; ++l) {
                    double acc = 0.0;
                    const std::size_t grow = static_cast<std::size_t>(i * m);
                    const std::size_t brow = static_cast<std::size_t>(l * m);
                    for (std::int64_t j = 0; j < m; ++j)
                        acc += g[grow + j] * bn->values[brow + j];
                    an->grad[static_cast<std::size_t>(i * k + l)] += acc;
                }
            }
        }
        if (bn->requires_grad) {
            bn->ensure_grad();
            // gb = a^T * g
            for (std::int64_t i = 0; i < n; ++i) {
                const std::size_t arow = static_cast<std::size_t>(i * k);
                const std::size_t grow = static_cast<std::size_t>(i * m);
                for (std::int64_t l = 0; l < k; ++l) {
                    const double x = an->values[arow + l];
                    if (x == 0.0) continue;
                    const std::size_t brow = static_cast<std::size_t>(l * m);
                    for (std::int64_t j = 0; j < m; ++j)
                        bn->grad[brow + j] += x * g[grow + j];
                }
            }
        }
    };
    return o;
}

Var transpose(Var a) {
    require_2d(a, "transpose");
    const std::int64_t n = a.shape()[0], m = a.shape()[1];
    const auto& av = a.values();
    std::vector<double> out(av.size());
    for (std::int64_t i = 0; i < n; ++i)
        for (std::int64_t j = 0; j < m; ++j)
            out[static_cast<std::size_t>(j * n + i)] = av[static_cast<std::size_t>(i * m + j)];
    Var o = make_node(*a.tape, "transpose", {m, n}, std::move(out), {a.id},
                      a.requires_grad());
    Node* on = &o.n();
    Node* an = &a.n();
    on->backward_fn = [on, an, n, m] {
        if (!an->requires_grad) return;
        an->ensure_grad();
        for (std::int64_t i = 0; i < n; ++i)
            for (std::int64_t j = 0; j < m; ++j)
                an->grad[static_cast<std::size_t>(i * m + j)] +=
                    on->grad[static_cast<std::size_t>(j * n + i)];
    };
    return o;
}

Var relu(Var a) {
    const auto& av = a.values();
    std::vector<double> out(av.size());
    for (std::size_t i = 0; i < av.size(); ++i) out[i] = av[i] > 0.0 ? av[i] : 0.0;
    Var o = make_node(*a.tape, "relu", a.shape(), std::move(out), {a.id},
                      a.requires_grad());
    Node* on = &o.n();
    Node* an = &a.n();
    on->backward_fn = [on, an] {
        if (!an->requires_grad) return;
        an->ensure_grad();
        for (std::size_t i = 0; i < on->grad.size(); ++i)
            if (an->values[i] > 0.0) an->grad[i] += on->grad[i];
    };
    return o;
}

Var vexp(Var a) {
    const auto& av = a.values();
    std::vector<double> out(av.size());
    for (std::size_t i = 0; i < av.size(); ++i) out[i] = std::exp(av[i]);
    Var o = make_node(*a.tape, "exp", a.shape(), std::move(out), {a.id},
                      a.requires_grad());
    Node* on = &o.n();
    Node* an = &a.n();
    on->backward_fn = [on, an] {
        if (!an->requires_grad) return;
        an->ensure_grad();
        for (std::size_t i = 0; i < on->grad.size(); ++i)
            an->grad[i] += on->grad[i] * on->values[i];
    };
    return o;
}

Var vlog(Var a) {
    const auto& av = a.values();
    std::vector<double> out(av.size());
    for (std::size_t i = 0; i < av.size(); ++i) out[i] = std::log(av[i]);
    Var o = make_node(*a.tape, "log", a.shape(), std::move(out), {a.id},
                      a.requires_grad());
    Node* on = &o.n();
    Node* an = &a.n();
    on->backward_fn = [on, an] {
        if (!an->requires_grad) return;
        an->ensure_grad();
        for (std::size_t i = 0; i < on->grad.size(); ++i)
            an->grad[i] += on->grad[i] / an->values[i];
    };
    return o;
}

Var vsqrt(Var a) {
    const auto& av = a.values();
    std::vector<double> out(av.size());
    for (std::size_t i = 0; i < av.size(); ++i) out[i] = std::sqrt(av[i]);
    Var o = make_node(*a.tape, "sqrt", a.shape(), std::move(out), {a.id},
                      a.requires_grad());
    Node* on = &o.n();
    Node* an = &a.n();
    on->backward_fn = [on, an] {
        if (!an->requires_grad) return;
        an->ensure_grad();
        for (std::size_t i = 0; i < on->grad.size(); ++i) {
            // Guard the exact-zero case so a perfectly reconstructed frame
            // does not poison the whole gradient with inf.
            const double denom = 2.0 * std::max(on->values[i], 1e-150);
            an->grad[i] += on->grad[i] / denom;
        }
    };
    return o;
}

Var sum(Var a) {
    const auto& av = a.values();
    double s = 0.0;
    for (double v : av) s += v;
    Var o = make_node(*a.tape, "sum", {1}, {s}, {a.id}, a.requires_grad());
    Node* on = &o.n();
    Node* an = &a.n();
    on->backward_fn = [on, an] {
        if (!an->requires_grad) return;
        an->ensure_grad();
        const double g = on->grad[0];
        for (std::size_t i = 0; i < an->grad.size(); ++i) an->grad[i] += g;
    };
    return o;
}

Var mean(Var a) {
    const std::int64_t n = numel(a.shape());
    return scale(sum(a), 1.0 / static_cast<double>(n));
}

namespace {

Var softmax_rows_impl(Var a, const std::vector<std::uint8_t>* mask) {
    require_2d(a, "softmax_rows");
    const std::int64_t n = a.shape()[0], m = a.shape()[1];
    if (mask && static_cast<std::int64_t>(mask->size()) != n * m) {
        throw ShapeError("softmax_rows: mask size does not match tensor");
    }
    const auto& av = a.values();
    std::vector<double> out(av.size(), 0.0);
    for (std::int64_t i = 0; i < n; ++i) {
        const std::size_t row = static_cast<std::size_t>(i * m);
        double mx = -std::numeric_limits<double>::infinity();
        for (std::int64_t j = 0; j < m; ++j) {
            if (mask && !(*mask)[row + j]) continue;
            mx = std::max(mx, av[row + j]);
        }
        if (!std::isfinite(mx)) {
            throw ContractError("softmax_rows: row " + std::to_string(i) +
                                " has no unmasked entries");
        }
        double denom = 0.0;
        for (std::int64_t j = 0; j < m; ++j) {
            if (mask && !(*mask)[row + j]) continue;
            const double e = std::exp(av[row + j] - mx);
            out[row + j] = e;
            denom += e;
        }
        for (std::int64_t j = 0; j < m; ++j) out[row + j] /= denom;
    }
    Var o = make_node(*a.tape, "softmax_rows", a.shape(), std::move(out), {a.id},
                      a.requires_grad());
    Node* on = &o.n();
    Node* an = &a.n();
    on->backward_fn = [on, an, n, m] {
        if (!an->requires_grad) return;
        an->ensure_grad();
        for (std::int64_t i = 0; i < n; ++i) {
            const std::size_t row = static_cast<std::size_t>(i * m);
            double dot = 0.0;
            for (std::int64_t j = 0; j < m; ++j)
                dot += on->grad[row + j] * on->values[row + j];
            for (std::int64_t j = 0; j < m; ++j)
                an->grad[row + j] +=
                    on->values[row + j] * (on->grad[row + j] - dot);
        }
    };
    return o;
}

}  // namespace

Var softmax_rows(Var a) { return softmax_rows_impl(a, nullptr); }

Var softmax_rows(Var a, const std::vector<std::uint8_t>& mask) {
    return softmax_rows_impl(a, &mask);
}

Var l2_normalize_rows(Var a) {
    require_2d(a, "l2_normalize_rows");
    const std::int64_t n = a.shape()[0], m = a.shape()[1];
    const auto& av = a.values();
    std::vector<double> out(av.size(), 0.0);
    std::vector<double> norms(static_cast<std::size_t>(n), 0.0);
    constexpr double kEps = 1e-12;
    for (std::int64_t i = 0; i < n; ++i) {
        const std::size_t row = static_cast<std::size_t>(i * m);
        double s = 0.0;
        for (std::int64_t j = 0; j < m; ++j) s += av[row + j] * av[row + j];
        const double r = std::sqrt(s);
        norms[static_cast<std::size_t>(i)] = r;
        if (r < kEps) continue;  // zero row stays zero
        for (std::int64_t j = 0; j < m; ++j) out[row + j] = av[row + j] / r;
    }
    Var o = make_node(*a.tape, "l2_normalize_rows", a.shape(), std::move(out),
                      {a.id}, a.requires_grad());
    Node* on = &o.n();
    Node* an = &a.n();
    on->backward_fn = [on, an, n, m, norms = std::move(norms)] {
        if (!an->requires_grad) return;
        an->ensure_grad();
        for (std::int64_t i = 0; i < n; ++i) {
            const double r = norms[static_cast<std::size_t>(i)];
            if (r < kEps) continue;
            const std::size_t row = static_cast<std::size_t>(i * m);
            double dot = 0.0;
            for (std::int64_t j = 0; j < m; ++j)
                dot += on->grad[row + j] * on->values[row + j];
            for (std::int64_t j = 0; j < m; ++j)
                an->grad[row + j] +=
                    (on->grad[row + j] - on->values[row + j] * dot) / r;
        }
    };
    return o;
}

Var l2norm_rows(Var a) {
    require_2d(a, "l2norm_rows");
    const std::int64_t n = a.shape()[0], m = a.shape()[1];
    const auto& av = a.values();
    std::vector<double> out(static_cast<std::size_t>(n), 0.0);
    for (std::int64_t i = 0; i < n; ++i) {
        const std::size_t row = static_cast<std::size_t>(i * m);
        double s = 0.0;
        for (std::int64_t j = 0; j < m; ++j) s += av[row + j] * av[row + j];
        out[static_cast<std::size_t>(i)] = std::sqrt(s);
    }
    Var o = make_node(*a.tape, "l2norm_rows", {n}, std::move(out), {a.id},
                      a.requires_grad());
    Node* on = &o.n();
    Node* an = &a.n();
    on->backward_fn = [on, an, n, m] {
        if (!an->requires_grad) return;
        an->ensure_grad();
        for (std::int64_t i = 0; i < n; ++i) {
            const double r = std::max(on->values[static_cast<std::size_t>(i)], 1e-150);
            const double g = on->grad[static_cast<std::size_t>(i)];
            const std::size_t row = static_cast<std::size_t>(i * m);
            for (std::int64_t j = 0; j < m; ++j)
                an->grad[row + j] += g * an->values[row + j] / r;
        }
    };
    return o;
}

Var gather_rows(Var a, const std::vector<int>& indices) {
    require_2d(a, "gather_rows");
    const std::int64_t n = a.shape()[0], m = a.shape()[1];
    for (int idx : indices) {
        if (idx < 0 || idx >= n) {
            throw RangeError("gather_rows: index " + std::to_string(idx) +
                             " out of range [0," + std::to_string(n) + ")");
        }
    }
    const std::int64_t k = static_cast<std::int64_t>(indices.size());
    const auto& av = a.values();
    std::vector<double> out(static_cast<std::size_t>(k * m));
    for (std::int64_t r = 0; r < k; ++r) {
        const std::size_t src = static_cast<std::size_t>(indices[static_cast<std::size_t>(r)]) *
                                static_cast<std::size_t>(m);
        std::copy_n(av.begin() + static_cast<std::ptrdiff_t>(src), m,
                    out.begin() + static_cast<std::ptrdiff_t>(r * m));
    }
    Var o = make_node(*a.tape, "gather_rows", {k, m}, std::move(out), {a.id},
                      a.requires_grad());
    Node* on = &o.n();
    Node* an = &a.n();
    on->backward_fn = [on, an, m, idx = indices] {
        if (!an->requires_grad) return;
        an->ensure_grad();
        for (std::size_t r = 0; r < idx.size(); ++r) {
            const std::size_t dst = static_cast<std::size_t>(idx[r]) * static_cast<std::size_t>(m);
            const std::size_t src = r * static_cast<std::size_t>(m);
            for (std::int64_t j = 0; j < m; ++j)
                an->grad[dst + static_cast<std::size_t>(j)] +=
                    on->grad[src + static_cast<std::size_t>(j)];
        }
    };
    return o;
}

Var concat_cols(Var a, Var b) {
    require_same_tape(a, b, "concat_cols");
    require_2d(a, "concat_cols");
    require_2d(b, "concat_cols");
    if (a.shape()[0] != b.shape()[0]) {
        throw ShapeError("concat_cols: row counts differ, " + shape_str(a.shape()) +
                         " vs " + shape_str(b.shape()));
    }
    const std::int64_t n = a.shape()[0], m1 = a.shape()[1], m2 = b.shape()[1];
    const auto& av = a.values();
    const auto& bv = b.values();
    std::vector<double> out(static_cast<std::size_t>(n * (m1 + m2)));
    for (std::int64_t i = 0; i < n; ++i) {
        std::copy_n(av.begin() + static_cast<std::ptrdiff_t>(i * m1), m1,
                    out.begin() + static_cast<std::ptrdiff_t>(i * (m1 + m2)));
        std::copy_n(bv.begin() + static_cast<std::ptrdiff_t>(i * m2), m2,
                    out.begin() + static_cast<std::ptrdiff_t>(i * (m1 + m2) + m1));
    }
    Var o = make_node(*a.tape, "concat_cols", {n, m1 + m2}, std::move(out),
                      {a.id, b.id}, a.requires_grad() || b.requires_grad());
    Node* on = &o.n();
    Node* an = &a.n();
    Node* bn = &b.n();
    on->backward_fn = [on, an, bn, n, m1, m2] {
        const std::int64_t m = m1 + m2;
        if (an->requires_grad) {
            an->ensure_grad();
            for (std::int64_t i = 0; i < n; ++i)
                for (std::int64_t j = 0; j < m1; ++j)
                    an->grad[static_cast<std::size_t>(i * m1 + j)] +=
                        on->grad[static_cast<std::size_t>(i * m + j)];
        }
        if (bn->requires_grad) {
            bn->ensure_grad();
            for (std::int64_t i = 0; i < n; ++i)
                for (std::int64_t j = 0; j < m2; ++j)
                    bn->grad[static_cast<std::size_t>(i * m2 + j)] +=
                        on->grad[static_cast<std::size_t>(i * m + m1 + j)];
        }
    };
    return o;
}

Var slice_cols(Var a, int lo, int hi) {
    require_2d(a, "slice_cols");
    const std::int64_t n = a.shape()[0], m = a.shape()[1];
    if (lo < 0 || hi > m || lo >= hi) {
        throw RangeError("slice_cols: bad range [" + std::to_string(lo) + "," +
                         std::to_string(hi) + ") for " + shape_str(a.shape()));
    }
    const std::int64_t w = hi - lo;
    const auto& av = a.values();
    std::vector<double> out(static_cast<std::size_t>(n * w));
    for (std::int64_t i = 0; i < n; ++i)
        std::copy_n(av.begin() + static_cast<std::ptrdiff_t>(i * m + lo), w,
                    out.begin() + static_cast<std::ptrdiff_t>(i * w));
    Var o = make_node(*a.tape, "slice_cols", {n, w}, std::move(out), {a.id},
                      a.requires_grad());
    Node* on = &o.n();
    Node* an = &a.n();
    on->backward_fn = [on, an, n, m, w, lo] {
        if (!an->requires_grad) return;
        an->ensure_grad();
        for (std::int64_t i = 0; i < n; ++i)
            for (std::int64_t j = 0; j < w; ++j)
                an->grad[static_cast<std::size_t>(i * m + lo + j)] +=
                    on->grad[static_cast<std::size_t>(i * w + j)];
    };
    return o;
}

Var reshape(Var a, Shape shape) {
    if (numel(shape) != numel(a.shape())) {
        throw ShapeError("reshape: cannot view " + shape_str(a.shape()) + " as " +
                         shape_str(shape));
    }
    Var o = make_node(*a.tape, "reshape", std::move(shape), a.values(), {a.id},
                      a.requires_grad());
    Node* on = &o.n();
    Node* an = &a.n();
    on->backward_fn = [on, an] {
        if (!an->requires_grad) return;
        an->ensure_grad();
        for (std::size_t i = 0; i < on->grad.size(); ++i) an->grad[i] += on->grad[i];
    };
    return o;
}

Var conv2d(Var input, Var kernel, Var bias, int stride, int pad) {
    require_same_tape(input, kernel, "conv2d");
    require_same_tape(input, bias, "conv2d");
    if (input.shape().size() != 3) {
        throw ShapeError("conv2d: input must be HWC, got " + shape_str(input.shape()));
    }
    if (kernel.shape().size() != 4) {
        throw ShapeError("conv2d: kernel must be (kh,kw,ci,co), got " +
                         shape_str(kernel.shape()));
    }
    if (stride < 1) throw ConfigError("conv2d: stride must be >= 1");
    if (pad < 0) throw ConfigError("conv2d: pad must be >= 0");
    const std::int64_t H = input.shape()[0], W = input.shape()[1], Ci = input.shape()[2];
    const std::int64_t Kh = kernel.shape()[0], Kw = kernel.shape()[1];
    const std::int64_t Kci = kernel.shape()[2], Co = kernel.shape()[3];
    if (Kci != Ci) {
        throw ShapeError("conv2d: kernel input channels " + std::to_string(Kci) +
                         " != input channels " + std::to_string(Ci));
    }
    if (bias.shape() != Shape{Co}) {
        throw ShapeError("conv2d: bias shape " + shape_str(bias.shape()) +
                         " != (" + std::to_string(Co) + ")");
    }
    if (H + 2 * pad < Kh || W + 2 * pad < Kw) {
        throw ShapeError("conv2d: kernel larger than padded input");
    }
    const std::int64_t Ho = (H + 2 * pad - Kh) / stride + 1;
    const std::int64_t Wo = (W + 2 * pad - Kw) / stride + 1;

    const auto& x = input.values();
    const auto& w = kernel.values();
    const auto& b = bias.values();
    std::vector<double> out(static_cast<std::size_t>(Ho * Wo * Co));
    for (std::int64_t oy = 0; oy < Ho; ++oy) {
        for (std::int64_t ox = 0; ox < Wo; ++ox) {
            const std::size_t obase = static_cast<std::size_t>((oy * Wo + ox) * Co);
            for (std::int64_t co = 0; co < Co; ++co)
                out[obase + static_cast<std::size_t>(co)] = b[static_cast<std::size_t>(co)];
            for (std::int64_t ky = 0; ky < Kh; ++ky) {
                const std::int64_t iy = oy * stride - pad + ky;
                if (iy < 0 || iy >= H) continue;
                for (std::int64_t kx = 0; kx < Kw; ++kx) {
                    const std::int64_t ix = ox * stride - pad + kx;
                    if (ix < 0 || ix >= W) continue;
                    const std::size_t xbase = static_cast<std::size_t>((iy * W + ix) * Ci);
                    const std::size_t wbase0 = static_cast<std::size_t>(((ky * Kw + kx) * Ci) * Co);
                    for (std::int64_t ci = 0; ci < Ci; ++ci) {
                        const double xv = x[xbase + static_cast<std::size_t>(ci)];
                        if (xv == 0.0) continue;
                        const std::size_t wbase = wbase0 + static_cast<std::size_t>(ci * Co);
                        for (std::int64_t co = 0; co < Co; ++co)
                            out[obase + static_cast<std::size_t>(co)] +=
                                xv * w[wbase + static_cast<std::size_t>(co)];
                    }
                }
            }
        }
    }
    Var o = make_node(*input.tape, "conv2d", {Ho, Wo, Co}, std::move(out),
                      {input.id, kernel.id, bias.id},
                      input.requires_grad() || kernel.requires_grad() ||
                          bias.requires_grad());
    Node* on = &o.n();
    Node* xn = &input.n();
    Node* wn = &kernel.n();
    Node* bn = &bias.n();
    on->backward_fn = [on, xn, wn, bn, H, W, Ci, Kh, Kw, Co, Ho, Wo, stride, pad] {
        const auto& g = on->grad;
        const bool need_x = xn->requires_grad;
        const bool need_w = wn->requires_grad;
        const bool need_b = bn->requires_grad;
        if (need_x) xn->ensure_grad();
        if (need_w) wn->ensure_grad();
        if (need_b) bn->ensure_grad();
        for (std::int64_t oy = 0; oy < Ho; ++oy) {
            for (std::int64_t ox = 0; ox < Wo; ++ox) {
                const std::size_t obase = static_cast<std::size_t>((oy * Wo + ox) * Co);
                if (need_b) {
                    for (std::int64_t co = 0; co < Co; ++co)
                        bn->grad[static_cast<std::size_t>(co)] +=
                            g[obase + static_cast<std::size_t>(co)];
                }
                for (std::int64_t ky = 0; ky < Kh; ++ky) {
                    const std::int64_t iy = oy * stride - pad + ky;
                    if (iy < 0 || iy >= H) continue;
                    for (std::int64_t kx = 0; kx < Kw; ++kx) {
                        const std::int64_t ix = ox * stride - pad + kx;
                        if (ix < 0 || ix >= W) continue;
                        const std::size_t xbase = static_cast<std::size_t>((iy * W + ix) * Ci);
                        const std::size_t wbase0 =
                            static_cast<std::size_t>(((ky * Kw + kx) * Ci) * Co);
                        for (std::int64_t ci = 0; ci < Ci; ++ci) {
                            const std::size_t wbase = wbase0 + static_cast<std::size_t>(ci * Co);
                            if (need_x) {
                                double acc = 0.0;
                                for (std::int64_t co = 0; co < Co; ++co)
                                    acc += g[obase + static_cast<std::size_t>(co)] *
                                           wn->values[wbase + static_cast<std::size_t>(co)];
                                xn->grad[xbase + static_cast<std::size_t>(ci)] += acc;
                            }
                            if (need_w) {
                                const double xv = xn->values[xbase + static_cast<std::size_t>(ci)];
                                if (xv != 0.0) {
                                    for (std::int64_t co = 0; co < Co; ++co)
                                        wn->grad[wbase + static_cast<std::size_t>(co)] +=
                                            xv * g[obase + static_cast<std::size_t>(co)];
                                }
                            }
                        }
                    }
                }
            }
        }
    };
    return o;
}

Var stop_gradient(Var a) {
    // Values copied, gradient boundary: output never requires grad.
    return make_node(*a.tape, "stop_gradient", a.shape(), a.values(), {a.id}, false);
}

}  // namespace liir::ad
