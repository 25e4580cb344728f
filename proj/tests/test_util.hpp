#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <vector>

#include "pinnsolve/autodiff.hpp"
#include "pinnsolve/rng.hpp"

namespace testutil {

using pinnsolve::Rng;
using pinnsolve::ad::TapeBuilder;
using pinnsolve::ad::Var;

/// Relative error with a floor so near-zero references do not blow up.
inline double rel_err(double a, double ref, double floor = 1e-3) {
    return std::fabs(a - ref) / std::max({std::fabs(a), std::fabs(ref), floor});
}

/// Hand-rolled tanh network on a scalar tape: inputs are created first, then
/// parameters layer by layer. Used as an independent reference for models.
struct ScalarNet {
    Var output;
    std::size_t inputs = 0;
    std::vector<Var> input_vars;
    std::vector<double> params;

    std::vector<double> leaf_values(double x) const {
        std::vector<double> v{x};
        v.insert(v.end(), params.begin(), params.end());
        return v;
    }
    std::vector<double> leaf_values2(double x, double y) const {
        std::vector<double> v{x, y};
        v.insert(v.end(), params.begin(), params.end());
        return v;
    }
};

inline ScalarNet tanh_net(TapeBuilder& b, std::size_t inputs, std::vector<std::size_t> hidden, Rng& rng) {
    ScalarNet net;
    net.inputs = inputs;
    std::vector<Var> act;
    for (std::size_t i = 0; i < inputs; ++i) act.push_back(b.input());
    net.input_vars = act;
    hidden.push_back(1);
    for (std::size_t l = 0; l < hidden.size(); ++l) {
        std::vector<Var> next;
        for (std::size_t o = 0; o < hidden[l]; ++o) {
            Var z = b.parameter();
            net.params.push_back(rng.uniform(-0.5, 0.5));  // bias
            for (Var a : act) {
                Var w = b.parameter();
                net.params.push_back(rng.uniform(-1.2, 1.2));
                z = z + w * a;
            }
            next.push_back(l + 1 == hidden.size() ? z : pinnsolve::ad::tanh(z));
        }
        act = next;
    }
    net.output = act[0];
    return net;
}

/// Polynomial in three variables with exact symbolic derivatives.
struct Poly {
    std::map<std::array<int, 3>, double> terms;

    Var build(TapeBuilder& b, const std::vector<Var>& xs) const {
        Var sum = b.constant(0.0);
        for (const auto& [e, c] : terms) {
            Var m = b.constant(c);
            for (int i = 0; i < 3; ++i)
                if (e[static_cast<std::size_t>(i)] > 0) m = m * pinnsolve::ad::pow(xs[static_cast<std::size_t>(i)], e[static_cast<std::size_t>(i)]);
            sum = sum + m;
        }
        return sum;
    }
    Poly derivative(int axis) const {
        Poly d;
        for (const auto& [e0, c] : terms) {
            auto e = e0;
            const int k = e[static_cast<std::size_t>(axis)];
            if (k == 0) continue;
            e[static_cast<std::size_t>(axis)] = k - 1;
            d.terms[e] += c * k;
        }
        return d;
    }
    double value(const std::vector<double>& p) const {
        double s = 0.0;
        for (const auto& [e, c] : terms) {
            double m = c;
            for (int i = 0; i < 3; ++i) m *= std::pow(p[static_cast<std::size_t>(i)], e[static_cast<std::size_t>(i)]);
            s += m;
        }
        return s;
    }
};

inline Poly random_polynomial(Rng& rng, int vars, int degree) {
    Poly p;
    const int nterms = 1 + static_cast<int>(rng.below(8));
    for (int t = 0; t < nterms; ++t) {
        std::array<int, 3> e{0, 0, 0};
        int left = static_cast<int>(rng.below(static_cast<std::size_t>(degree) + 1));
        while (left > 0) {
            e[rng.below(static_cast<std::size_t>(vars))] += 1;
            --left;
        }
        p.terms[e] += std::round(rng.uniform(-5, 5));
    }
    return p;
}

/// Random well-defined expression over `inputs` fresh inputs in (0, 1).
inline Var random_graph(TapeBuilder& b, Rng& rng, std::size_t inputs, int ops) {
    namespace ad = pinnsolve::ad;
    std::vector<Var> pool;
    for (std::size_t i = 0; i < inputs; ++i) pool.push_back(b.input());
    for (int k = 0; k < ops; ++k) {
        Var a = pool[rng.below(pool.size())];
        Var c = pool[rng.below(pool.size())];
        Var r;
        switch (rng.below(9)) {
        case 0: r = a + c; break;
        case 1: r = a - c; break;
        case 2: r = a * c; break;
        case 3: r = a / (1.0 + c * c); break;
        case 4: r = ad::sin(a); break;
        case 5: r = ad::cos(a); break;
        case 6: r = ad::tanh(a); break;
        case 7: r = ad::exp(0.3 * ad::tanh(a)); break;
        default: r = ad::pow(a, 2 + static_cast<int>(rng.below(2))); break;
        }
        pool.push_back(r);
    }
    Var sum = pool.back();
    for (std::size_t i = 0; i < inputs; ++i) sum = sum + 0.1 * pool[pool.size() - 2 - i % (pool.size() - 1)];
    return sum;
}

}  // namespace testutil
