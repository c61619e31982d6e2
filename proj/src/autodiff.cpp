#include "techcast/autodiff.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace techcast::ad {
namespace {

double stable_sigmoid(double z) {
    if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
    const double e = std::exp(z);
    return e / (1.0 + e);
}

double stable_softplus(double z) { return z > 0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z)); }

}  // namespace

Var Tape::push(Matrix value, std::function<void(Tape&, std::size_t)> backward) {
    nodes_.push_back(Node{std::move(value), Matrix(), std::move(backward)});
    return Var{nodes_.size() - 1};
}

Matrix& Tape::grad_ref(std::size_t id) {
    auto& node = nodes_[id];
    if (node.grad.size() == 0) node.grad = Matrix::Zero(node.value.rows(), node.value.cols());
    return node.grad;
}

const Matrix& Tape::grad(Var v) { return grad_ref(v.id); }

Var Tape::leaf(Matrix value) { return push(std::move(value), nullptr); }

Var Tape::matmul(Var a, Var b) {
    Matrix out = value(a) * value(b);
    return push(std::move(out), [a, b](Tape& t, std::size_t self) {
        const Matrix& g = t.nodes_[self].grad;
        t.grad_ref(a.id).noalias() += g * t.value(b).transpose();
        t.grad_ref(b.id).noalias() += t.value(a).transpose() * g;
    });
}

Var Tape::add(Var a, Var b) {
    if (value(a).rows() != value(b).rows() || value(a).cols() != value(b).cols())
        throw std::invalid_argument("ad::add: shape mismatch");
    Matrix out = value(a) + value(b);
    return push(std::move(out), [a, b](Tape& t, std::size_t self) {
        const Matrix& g = t.nodes_[self].grad;
        t.grad_ref(a.id) += g;
        t.grad_ref(b.id) += g;
    });
}

Var Tape::add_bias(Var a, Var b) {
    if (value(b).cols() != 1 || value(b).rows() != value(a).rows())
        throw std::invalid_argument("ad::add_bias: shape mismatch");
    Matrix out = value(a).colwise() + value(b).col(0);
    return push(std::move(out), [a, b](Tape& t, std::size_t self) {
        const Matrix& g = t.nodes_[self].grad;
        t.grad_ref(a.id) += g;
        t.grad_ref(b.id) += g.rowwise().sum();
    });
}

Var Tape::mul(Var a, Var b) {
    Matrix out = value(a).cwiseProduct(value(b));
    return push(std::move(out), [a, b](Tape& t, std::size_t self) {
        const Matrix& g = t.nodes_[self].grad;
        t.grad_ref(a.id) += g.cwiseProduct(t.value(b));
        t.grad_ref(b.id) += g.cwiseProduct(t.value(a));
    });
}

Var Tape::scale(Var a, double s) {
    Matrix out = value(a) * s;
    return push(std::move(out), [a, s](Tape& t, std::size_t self) { t.grad_ref(a.id) += t.nodes_[self].grad * s; });
}

Var Tape::add_constant(Var a, double c) {
    Matrix out = value(a).array() + c;
    return push(std::move(out), [a](Tape& t, std::size_t self) { t.grad_ref(a.id) += t.nodes_[self].grad; });
}

Var Tape::sigmoid(Var a) {
    Matrix out = value(a).unaryExpr([](double z) { return stable_sigmoid(z); });
    return push(std::move(out), [a](Tape& t, std::size_t self) {
        const auto& s = t.nodes_[self].value.array();
        t.grad_ref(a.id).array() += t.nodes_[self].grad.array() * s * (1.0 - s);
    });
}

Var Tape::tanh(Var a) {
    Matrix out = value(a).array().tanh();
    return push(std::move(out), [a](Tape& t, std::size_t self) {
        const auto& y = t.nodes_[self].value.array();
        t.grad_ref(a.id).array() += t.nodes_[self].grad.array() * (1.0 - y * y);
    });
}

Var Tape::softplus(Var a) {
    Matrix out = value(a).unaryExpr([](double z) { return stable_softplus(z); });
    return push(std::move(out), [a](Tape& t, std::size_t self) {
        const Matrix ds = t.value(a).unaryExpr([](double z) { return stable_sigmoid(z); });
        t.grad_ref(a.id).array() += t.nodes_[self].grad.array() * ds.array();
    });
}

Var Tape::rows(Var a, Eigen::Index offset, Eigen::Index count) {
    if (offset < 0 || count < 0 || offset + count > value(a).rows())
        throw std::invalid_argument("ad::rows: range out of bounds");
    Matrix out = value(a).middleRows(offset, count);
    return push(std::move(out), [a, offset, count](Tape& t, std::size_t self) {
        t.grad_ref(a.id).middleRows(offset, count) += t.nodes_[self].grad;
    });
}

Var Tape::gaussian_nll_sum(Var mu, Var sigma, const Matrix& target) {
    const Matrix& m = value(mu);
    const Matrix& s = value(sigma);
    if (m.rows() != target.rows() || m.cols() != target.cols() || s.rows() != m.rows() || s.cols() != m.cols())
        throw std::invalid_argument("ad::gaussian_nll_sum: shape mismatch");
    const double half_log_2pi = 0.5 * std::log(2.0 * std::numbers::pi);
    const auto z = ((target - m).array() / s.array()).eval();
    Matrix out(1, 1);
    out(0, 0) = static_cast<double>(m.size()) * half_log_2pi + s.array().log().sum() + 0.5 * z.square().sum();
    return push(std::move(out), [mu, sigma, target](Tape& t, std::size_t self) {
        const double g = t.nodes_[self].grad(0, 0);
        const auto& sv = t.value(sigma).array();
        const auto diff = (target - t.value(mu)).array().eval();
        // d/dmu = -(y - mu)/sigma^2 ; d/dsigma = 1/sigma - (y - mu)^2/sigma^3
        t.grad_ref(mu.id).array() -= g * diff / sv.square();
        t.grad_ref(sigma.id).array() += g * (1.0 / sv - diff.square() / sv.cube());
    });
}

void Tape::backward(Var out) {
    if (value(out).size() != 1) throw std::invalid_argument("ad::backward: output must be 1x1");
    for (auto& n : nodes_) n.grad.resize(0, 0);
    grad_ref(out.id)(0, 0) = 1.0;
    for (std::size_t i = out.id + 1; i-- > 0;) {
        auto& node = nodes_[i];
        if (node.grad.size() == 0 || !node.backward) continue;
        node.backward(*this, i);
    }
}

}  // namespace techcast::ad
