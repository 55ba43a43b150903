#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "liir/errors.hpp"

namespace liir::ad {

using Shape = std::vector<std::int64_t>;

std::int64_t numel(const Shape& shape);
std::string shape_str(const Shape& shape);

// One node in a computation tape: the result of a primitive operation (or a
// leaf). Values are dense row-major doubles. Gradients are allocated lazily
// during the backward pass.
struct Node {
    Shape shape;
    std::vector<double> values;
    std::vector<double> grad;  // same size as values once touched by backward
    bool requires_grad = false;
    const char* op = "leaf";
    std::vector<int> inputs;                 // ids of input nodes, in order
    std::function<void()> backward_fn;       // accumulates into input grads

    void ensure_grad() {
        if (grad.size() != values.size()) grad.assign(values.size(), 0.0);
    }
};

// Append-only record of executed primitives. Creation order is topological
// by construction (an op can only consume already-created nodes), so the
// backward pass is a single reverse sweep that visits each node once.
//
// A tape is confined to one logical thread. Distinct tapes may run in
// parallel; forward-only evaluation of frozen values is safe to share.
class Tape {
public:
    Tape() = default;
    Tape(const Tape&) = delete;
    Tape& operator=(const Tape&) = delete;

    Node& node(int id) { return *nodes_[static_cast<std::size_t>(id)]; }
    const Node& node(int id) const { return *nodes_[static_cast<std::size_t>(id)]; }
    int size() const { return static_cast<int>(nodes_.size()); }

    int append(std::unique_ptr<Node> n) {
        nodes_.push_back(std::move(n));
        return static_cast<int>(nodes_.size()) - 1;
    }

    // Reverse-mode sweep from a scalar node. Grad of the loss node itself is
    // seeded to 1; stop_gradient boundaries propagate nothing.
    void backward(int loss_id);

private:
    std::vector<std::unique_ptr<Node>> nodes_;  // stable addresses
};

// Lightweight handle to a tape node.
struct Var {
    Tape* tape = nullptr;
    int id = -1;

    Node& n() const { return tape->node(id); }
    const Shape& shape() const { return n().shape; }
    const std::vector<double>& values() const { return n().values; }
    const std::vector<double>& grad() const { return n().grad; }
    bool requires_grad() const { return n().requires_grad; }
    double scalar() const;
};

// ---- leaf creation ----
// Throws NumericError if any provided value is non-finite.
Var leaf(Tape& tape, Shape shape, std::vector<double> values, bool requires_grad);
Var constant(Tape& tape, Shape shape, std::vector<double> values);
Var scalar_const(Tape& tape, double v);

// ---- primitive operations ----
// All primitives validate input shapes (ShapeError) and scan their output for
// non-finite values (NumericError), so any non-finite input surfaces at the
// op that produced or consumed it.

Var add(Var a, Var b);               // elementwise, same shape
Var sub(Var a, Var b);               // elementwise, same shape
Var mul(Var a, Var b);               // elementwise, same shape
Var scale(Var a, double c);          // multiply by compile-time constant
Var matmul(Var a, Var b);            // (n,k) x (k,m) -> (n,m)
Var transpose(Var a);                // (n,m) -> (m,n)
Var relu(Var a);
Var vexp(Var a);
Var vlog(Var a);
Var vsqrt(Var a);
Var sum(Var a);                      // full reduction -> shape {1}
Var mean(Var a);                     // sum / numel   -> shape {1}

// Row softmax of a 2D tensor, computed with max subtraction. With a mask,
// the softmax support of row i is restricted to columns where mask[i*m+j]
// is nonzero; masked entries are exactly 0 in the output. Each row must
// keep at least one unmasked column.
Var softmax_rows(Var a);
Var softmax_rows(Var a, const std::vector<std::uint8_t>& mask);

// Rows of a 2D tensor scaled to unit Euclidean norm. Rows with norm below
// 1e-12 are left as zeros and receive zero gradient.
Var l2_normalize_rows(Var a);

// Euclidean norm of each row of a 2D tensor -> shape {n}.
Var l2norm_rows(Var a);

// Row selection: out[k] = a[indices[k]] for a 2D tensor. Gradient scatters
// back by addition (duplicate indices accumulate).
Var gather_rows(Var a, const std::vector<int>& indices);

Var concat_cols(Var a, Var b);             // (n,m1)+(n,m2) -> (n,m1+m2)
Var slice_cols(Var a, int lo, int hi);     // columns [lo,hi)
Var reshape(Var a, Shape shape);           // same numel

// 2D convolution over an HWC grid with an explicit stride and symmetric
// zero padding. kernel is (kh, kw, c_in, c_out), bias is (c_out).
Var conv2d(Var input, Var kernel, Var bias, int stride, int pad);

// Identity forward, zero backward.
Var stop_gradient(Var a);

}  // namespace liir::ad
