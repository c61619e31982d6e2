#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <functional>
#include <vector>

namespace techcast::ad {

using Matrix = Eigen::MatrixXd;

/// Handle to a node on a Tape.
struct Var {
    std::size_t id;
};

/// Reverse-mode tape over dense matrices. Nodes are appended in evaluation
/// order, so a single reverse sweep visits every consumer before its inputs.
///
/// Columns are batch entries throughout; bias vectors broadcast over columns.
class Tape {
public:
    Var leaf(Matrix value);

    [[nodiscard]] const Matrix& value(Var v) const { return nodes_[v.id].value; }
    /// Gradient accumulated by backward(); zero for nodes the output does not reach.
    [[nodiscard]] const Matrix& grad(Var v);

    Var matmul(Var a, Var b);
    Var add(Var a, Var b);
    /// a (m x n) + b (m x 1) broadcast over columns.
    Var add_bias(Var a, Var b);
    Var mul(Var a, Var b);
    Var scale(Var a, double s);
    Var add_constant(Var a, double c);
    Var sigmoid(Var a);
    Var tanh(Var a);
    /// log(1 + exp(a)), computed without overflow.
    Var softplus(Var a);
    /// Rows [offset, offset + count) of a.
    Var rows(Var a, Eigen::Index offset, Eigen::Index count);
    /// 1x1 sum over entries of the Gaussian negative log-likelihood of
    /// `target` (not differentiated) under N(mu, sigma^2).
    Var gaussian_nll_sum(Var mu, Var sigma, const Matrix& target);

    /// Seeds d(out)/d(out) = 1 for a 1x1 output and propagates.
    void backward(Var out);

    [[nodiscard]] std::size_t size() const { return nodes_.size(); }

private:
    struct Node {
        Matrix value;
        Matrix grad;
        std::function<void(Tape&, std::size_t)> backward;
    };

    Var push(Matrix value, std::function<void(Tape&, std::size_t)> backward);
    Matrix& grad_ref(std::size_t id);

    std::vector<Node> nodes_;
};

}  // namespace techcast::ad
