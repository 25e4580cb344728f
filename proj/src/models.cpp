#include "pinnsolve/models.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "pinnsolve/errors.hpp"

namespace pinnsolve {

namespace {

struct Layer {
    std::size_t fan_in;
    std::size_t fan_out;
    std::size_t offset;  // start of W; b follows at offset + fan_in * fan_out
};

std::vector<Layer> layers_of(const MlpArchitecture& arch) {
    const auto w = arch.widths();
    std::vector<Layer> out;
    std::size_t off = 0;
    for (std::size_t l = 0; l + 1 < w.size(); ++l) {
        out.push_back({w[l], w[l + 1], off});
        off += (w[l] + 1) * w[l + 1];
    }
    return out;
}

Eigen::ArrayXXd fast_tanh(const Eigen::ArrayXXd& z) { return 1.0 - 2.0 / ((2.0 * z).exp() + 1.0); }

std::vector<double> poly_derivative(const std::vector<double>& p) {
    std::vector<double> d(p.size() > 1 ? p.size() - 1 : 1, 0.0);
    for (std::size_t i = 1; i < p.size(); ++i) d[i - 1] = p[i] * static_cast<double>(i);
    return d;
}

// p(a) * (1 - a^2)
std::vector<double> times_sech2(const std::vector<double>& p) {
    std::vector<double> out(p.size() + 2, 0.0);
    for (std::size_t i = 0; i < p.size(); ++i) {
        out[i] += p[i];
        out[i + 2] -= p[i];
    }
    while (out.size() > 1 && out.back() == 0.0) out.pop_back();
    return out;
}

double factorial(int n) {
    double f = 1.0;
    for (int i = 2; i <= n; ++i) f *= i;
    return f;
}

}  // namespace

// ---------------------------------------------------------------------------

std::vector<std::size_t> MlpArchitecture::widths() const {
    std::vector<std::size_t> w{inputs};
    for (std::size_t l = 0; l < layers; ++l) w.push_back(units);
    w.push_back(outputs);
    return w;
}

std::size_t MlpArchitecture::param_count() const {
    const auto w = widths();
    std::size_t n = 0;
    for (std::size_t l = 0; l + 1 < w.size(); ++l) n += (w[l] + 1) * w[l + 1];
    return n;
}

void MlpArchitecture::validate() const {
    if (inputs < 1 || outputs < 1) throw Error(ErrorCategory::Config, "network input and output widths must be positive");
    if (layers < 1) throw Error(ErrorCategory::Config, "network needs at least one hidden layer");
    if (units < 1) throw Error(ErrorCategory::Config, "network needs at least one unit per layer");
}

void DeepOnetArchitecture::validate() const {
    branch.validate();
    trunk.validate();
    if (p < 1 || outputs < 1) throw Error(ErrorCategory::Config, "DeepONet width p and output count must be positive");
    if (branch.outputs != p * outputs || trunk.outputs != p * outputs)
        throw Error(ErrorCategory::Config, "branch and trunk output widths must both equal p times the output count");
}

std::size_t NetworkParams::expected_size() const {
    return kind == ModelKind::Pinn ? mlp.param_count() : onet.param_count();
}

Eigen::VectorXd glorot_init(const MlpArchitecture& arch, Rng& rng) {
    arch.validate();
    Eigen::VectorXd v = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(arch.param_count()));
    for (const Layer& l : layers_of(arch)) {
        const double bound = std::sqrt(6.0 / static_cast<double>(l.fan_in + l.fan_out));
        for (std::size_t i = 0; i < l.fan_in * l.fan_out; ++i)
            v[static_cast<Eigen::Index>(l.offset + i)] = rng.uniform(-bound, bound);
    }
    return v;
}

NetworkParams init_params(const MlpArchitecture& arch, std::uint64_t seed) {
    Rng rng(seed, streams::kParams);
    NetworkParams p;
    p.kind = ModelKind::Pinn;
    p.mlp = arch;
    p.values = glorot_init(arch, rng);
    return p;
}

NetworkParams init_params(const DeepOnetArchitecture& arch, std::uint64_t seed) {
    arch.validate();
    Rng branch_rng(seed, streams::kParams);
    Rng trunk_rng(seed, streams::kParams + 1);
    NetworkParams p;
    p.kind = ModelKind::DeepOnet;
    p.onet = arch;
    const auto b = glorot_init(arch.branch, branch_rng);
    const auto t = glorot_init(arch.trunk, trunk_rng);
    p.values.resize(b.size() + t.size());
    p.values << b, t;
    return p;
}

// ---------------------------------------------------------------------------

std::vector<ad::Var> mlp_forward(const MlpArchitecture& arch, std::span<const ad::Var> params,
                                 std::span<const ad::Var> inputs) {
    if (inputs.size() != arch.inputs) throw Error(ErrorCategory::Argument, "mlp_forward: input width mismatch");
    if (params.size() != arch.param_count()) throw Error(ErrorCategory::Argument, "mlp_forward: parameter count mismatch");
    std::vector<ad::Var> act(inputs.begin(), inputs.end());
    const auto layers = layers_of(arch);
    for (std::size_t li = 0; li < layers.size(); ++li) {
        const Layer& l = layers[li];
        std::vector<ad::Var> next;
        for (std::size_t o = 0; o < l.fan_out; ++o) {
            ad::Var z = params[l.offset + l.fan_in * l.fan_out + o];
            for (std::size_t i = 0; i < l.fan_in; ++i) z = z + params[l.offset + i * l.fan_out + o] * act[i];
            next.push_back(li + 1 < layers.size() ? ad::tanh(z) : z);
        }
        act = std::move(next);
    }
    return act;
}

ad::Tape mlp_tape(const MlpArchitecture& arch, std::size_t output) {
    ad::TapeBuilder b;
    std::vector<ad::Var> in, params;
    for (std::size_t i = 0; i < arch.inputs; ++i) in.push_back(b.input());
    for (std::size_t i = 0; i < arch.param_count(); ++i) params.push_back(b.parameter());
    return b.build(mlp_forward(arch, params, in).at(output));
}

std::vector<double> mlp_forward(const MlpArchitecture& arch, const Eigen::VectorXd& params,
                                std::span<const double> point) {
    if (point.size() != arch.inputs) throw Error(ErrorCategory::Argument, "mlp_forward: input width mismatch");
    if (static_cast<std::size_t>(params.size()) != arch.param_count())
        throw Error(ErrorCategory::Argument, "mlp_forward: parameter count mismatch");
    Eigen::VectorXd a = Eigen::Map<const Eigen::VectorXd>(point.data(), static_cast<Eigen::Index>(point.size()));
    const auto layers = layers_of(arch);
    for (std::size_t li = 0; li < layers.size(); ++li) {
        const Layer& l = layers[li];
        Eigen::Map<const Eigen::MatrixXd> w(params.data() + l.offset, static_cast<Eigen::Index>(l.fan_out),
                                            static_cast<Eigen::Index>(l.fan_in));
        Eigen::Map<const Eigen::VectorXd> bias(params.data() + l.offset + l.fan_in * l.fan_out,
                                               static_cast<Eigen::Index>(l.fan_out));
        Eigen::VectorXd z = w * a + bias;
        if (li + 1 < layers.size()) z = z.array().tanh();
        a = std::move(z);
    }
    return {a.data(), a.data() + a.size()};
}

std::vector<ad::Var> deeponet_forward(const DeepOnetArchitecture& arch, std::span<const ad::Var> params,
                                      std::span<const ad::Var> sensors, std::span<const ad::Var> inputs) {
    if (params.size() != arch.param_count())
        throw Error(ErrorCategory::Argument, "deeponet_forward: parameter count mismatch");
    const std::size_t nb = arch.branch.param_count();
    const auto b = mlp_forward(arch.branch, params.subspan(0, nb), sensors);
    const auto t = mlp_forward(arch.trunk, params.subspan(nb), inputs);
    std::vector<ad::Var> out;
    for (std::size_t l = 0; l < arch.outputs; ++l) {
        ad::Var s = b[l * arch.p] * t[l * arch.p];
        for (std::size_t k = 1; k < arch.p; ++k) s = s + b[l * arch.p + k] * t[l * arch.p + k];
        out.push_back(s);
    }
    return out;
}

ad::Tape deeponet_tape(const DeepOnetArchitecture& arch, std::size_t output) {
    ad::TapeBuilder b;
    std::vector<ad::Var> sensors, in, params;
    for (std::size_t i = 0; i < arch.branch.inputs; ++i) sensors.push_back(b.input());
    for (std::size_t i = 0; i < arch.trunk.inputs; ++i) in.push_back(b.input());
    for (std::size_t i = 0; i < arch.param_count(); ++i) params.push_back(b.parameter());
    return b.build(deeponet_forward(arch, params, sensors, in).at(output));
}

std::vector<double> deeponet_forward(const DeepOnetArchitecture& arch, const Eigen::VectorXd& params,
                                     std::span<const double> sensors, std::span<const double> point) {
    if (static_cast<std::size_t>(params.size()) != arch.param_count())
        throw Error(ErrorCategory::Argument, "deeponet_forward: parameter count mismatch");
    const auto nb = static_cast<Eigen::Index>(arch.branch.param_count());
    const auto b = mlp_forward(arch.branch, params.head(nb).eval(), sensors);
    const auto t = mlp_forward(arch.trunk, params.tail(params.size() - nb).eval(), point);
    std::vector<double> out(arch.outputs, 0.0);
    for (std::size_t l = 0; l < arch.outputs; ++l)
        for (std::size_t k = 0; k < arch.p; ++k) out[l] += b[l * arch.p + k] * t[l * arch.p + k];
    return out;
}

// ---------------------------------------------------------------------------

std::pair<double, double> periodic_embed(double x, double xl, double xr) {
    if (!(xr > xl)) throw Error(ErrorCategory::Argument, "periodic_embed: xr must exceed xl");
    const double theta = 2.0 * std::numbers::pi * x / (xr - xl);
    return {std::cos(theta), std::sin(theta)};
}

std::pair<ad::Var, ad::Var> periodic_embed(ad::Var x, double xl, double xr) {
    if (!(xr > xl)) throw Error(ErrorCategory::Argument, "periodic_embed: xr must exceed xl");
    const ad::Var theta = (2.0 * std::numbers::pi / (xr - xl)) * x;
    return {ad::cos(theta), ad::sin(theta)};
}

Featurizer::Featurizer(const Domain& domain, const std::vector<bool>& periodic) : dims_(domain.dims()) {
    for (std::size_t a = 0; a < dims_; ++a) {
        if (a < periodic.size() && periodic[a]) {
            const double omega = 2.0 * std::numbers::pi / domain.axis(a).length();
            features_.push_back({a, Feature::Kind::Cos, omega});
            features_.push_back({a, Feature::Kind::Sin, omega});
        } else {
            features_.push_back({a, Feature::Kind::Identity, 0.0});
        }
    }
}

std::vector<ad::Var> Featurizer::build(std::span<const ad::Var> coords) const {
    if (coords.size() != dims_) throw Error(ErrorCategory::Argument, "featurizer: coordinate width mismatch");
    std::vector<ad::Var> out;
    for (const Feature& f : features_) {
        const ad::Var x = coords[f.axis];
        switch (f.kind) {
        case Feature::Kind::Identity: out.push_back(x); break;
        case Feature::Kind::Cos: out.push_back(ad::cos(f.omega * x)); break;
        case Feature::Kind::Sin: out.push_back(ad::sin(f.omega * x)); break;
        }
    }
    return out;
}

Eigen::MatrixXd Featurizer::jet(const KeySet& keys, const Eigen::MatrixXd& points) const {
    if (static_cast<std::size_t>(points.rows()) != dims_)
        throw Error(ErrorCategory::Argument, "featurizer: point width mismatch");
    const Eigen::Index n = points.cols();
    Eigen::MatrixXd out = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(width()),
                                                static_cast<Eigen::Index>(keys.size()) * n);
    for (std::size_t k = 0; k < keys.size(); ++k) {
        const DerivKey& key = keys.key(k);
        const auto order = static_cast<int>(key.size());
        for (std::size_t fi = 0; fi < features_.size(); ++fi) {
            const Feature& f = features_[fi];
            if (std::any_of(key.begin(), key.end(), [&](int a) { return static_cast<std::size_t>(a) != f.axis; }))
                continue;
            auto dst = out.row(static_cast<Eigen::Index>(fi)).segment(static_cast<Eigen::Index>(k) * n, n).array();
            const Eigen::ArrayXd x = points.row(static_cast<Eigen::Index>(f.axis)).transpose().array();
            if (f.kind == Feature::Kind::Identity) {
                if (order == 0) dst = x.transpose();
                else if (order == 1) dst.setOnes();
                continue;
            }
            const Eigen::ArrayXd c = (f.omega * x).cos(), s = (f.omega * x).sin();
            const double scale = std::pow(f.omega, order);
            // d^n cos = w^n {cos, -sin, -cos, sin}[n % 4]; d^n sin = w^n {sin, cos, -sin, -cos}[n % 4]
            const int phase = (order + (f.kind == Feature::Kind::Sin ? 3 : 0)) % 4;
            switch (phase) {
            case 0: dst = (scale * c).transpose(); break;
            case 1: dst = (-scale * s).transpose(); break;
            case 2: dst = (-scale * c).transpose(); break;
            default: dst = (scale * s).transpose(); break;
            }
        }
    }
    return out;
}

// ---------------------------------------------------------------------------

JetMlp::JetMlp(const MlpArchitecture& arch, const KeySet& keys) : arch_(arch), keys_(keys) {
    arch_.validate();
    tanh_poly_.push_back({0.0, 1.0});
    for (int m = 0; m <= keys_.max_order(); ++m) tanh_poly_.push_back(times_sech2(poly_derivative(tanh_poly_.back())));
}

Eigen::MatrixXd JetMlp::forward(const double* params, Eigen::MatrixXd a, Eigen::Index n, Cache* cache) const {
    const auto layers = layers_of(arch_);
    const auto nk = static_cast<Eigen::Index>(keys_.size());
    if (a.cols() != nk * n || static_cast<std::size_t>(a.rows()) != arch_.inputs)
        throw Error(ErrorCategory::Argument, "JetMlp: input jet shape mismatch");
    if (cache) {
        cache->inputs.clear();
        cache->pre.clear();
        cache->poly.clear();
    }
    // poly rows: block m holds d^m tanh for m = 1 .. needed-1 (the value itself lives in out)
    const Eigen::Index needed = nk > 1 || cache ? keys_.max_order() + 2 : 1;
    std::vector<double> tmp;
    for (std::size_t li = 0; li < layers.size(); ++li) {
        const Layer& l = layers[li];
        const auto fo = static_cast<Eigen::Index>(l.fan_out);
        Eigen::Map<const Eigen::MatrixXd> w(params + l.offset, fo, static_cast<Eigen::Index>(l.fan_in));
        Eigen::Map<const Eigen::VectorXd> bias(params + l.offset + l.fan_in * l.fan_out, fo);
        Eigen::MatrixXd z(fo, nk * n);
        z.noalias() = w * a;
        z.leftCols(n).colwise() += bias;
        if (cache) cache->inputs.push_back(std::move(a));
        if (li + 1 == layers.size()) return z;

        Eigen::MatrixXd out(fo, nk * n);
        out.leftCols(n).array() = fast_tanh(z.leftCols(n).array());
        Eigen::MatrixXd poly(fo * std::max<Eigen::Index>(needed, 1), n);
        tmp.resize(static_cast<std::size_t>(fo));
        double* t = tmp.data();
        for (Eigen::Index j = 0; j < n; ++j) {
            const double* act = out.col(j).data();
            double* pc = poly.col(j).data();
            for (Eigen::Index m = 1; m < needed; ++m) {
                const auto& c = tanh_poly_[static_cast<std::size_t>(m)];
                double* dst = pc + m * fo;
                for (Eigen::Index i = 0; i < fo; ++i) dst[i] = c.back();
                for (std::size_t q = c.size() - 1; q-- > 0;) {
                    const double cq = c[q];
                    for (Eigen::Index i = 0; i < fo; ++i) dst[i] = dst[i] * act[i] + cq;
                }
            }
            for (Eigen::Index k = 1; k < nk; ++k) {
                double* dst = out.col(k * n + j).data();
                const auto& parts = keys_.partitions(static_cast<std::size_t>(k));
                for (std::size_t q = 0; q < parts.size(); ++q) {
                    const auto& part = parts[q];
                    double* acc = q == 0 ? dst : t;
                    const double* pm = pc + static_cast<Eigen::Index>(part.size()) * fo;
                    const double* z0 = z.col(part[0] * n + j).data();
                    for (Eigen::Index i = 0; i < fo; ++i) acc[i] = pm[i] * z0[i];
                    for (std::size_t b = 1; b < part.size(); ++b) {
                        const double* zb = z.col(part[b] * n + j).data();
                        for (Eigen::Index i = 0; i < fo; ++i) acc[i] *= zb[i];
                    }
                    if (q > 0)
                        for (Eigen::Index i = 0; i < fo; ++i) dst[i] += t[i];
                }
            }
        }
        if (cache) {
            cache->pre.push_back(std::move(z));
            cache->poly.push_back(std::move(poly));
        }
        a = std::move(out);
    }
    return a;
}

void JetMlp::backward(const double* params, const Cache& cache, Eigen::MatrixXd d, Eigen::Index n,
                      double* grad) const {
    const auto layers = layers_of(arch_);
    const auto nk = static_cast<Eigen::Index>(keys_.size());
    std::vector<double> buf;
    for (std::size_t li = layers.size(); li-- > 0;) {
        const Layer& l = layers[li];
        const auto fo = static_cast<Eigen::Index>(l.fan_out);
        const auto fi = static_cast<Eigen::Index>(l.fan_in);
        if (li + 1 < layers.size()) {
            // d holds d(loss)/d(activation jet); map it onto the pre-activation jet in place.
            const Eigen::MatrixXd& z = cache.pre[li];
            const Eigen::MatrixXd& poly = cache.poly[li];
            buf.resize(static_cast<std::size_t>(fo * (nk + 1)));
            double* t = buf.data();
            double* dzc = t + fo;  // nk columns of dz for the current point
            for (Eigen::Index j = 0; j < n; ++j) {
                const double* pc = poly.col(j).data();
                const double* d0 = d.col(j).data();
                const double* p1 = pc + fo;
                for (Eigen::Index i = 0; i < fo; ++i) dzc[i] = d0[i] * p1[i];
                for (Eigen::Index i = fo; i < nk * fo; ++i) dzc[i] = 0.0;
                for (Eigen::Index k = 1; k < nk; ++k) {
                    const double* dk = d.col(k * n + j).data();
                    for (const auto& part : keys_.partitions(static_cast<std::size_t>(k))) {
                        const auto m = static_cast<Eigen::Index>(part.size());
                        const double* pm = pc + m * fo;
                        const double* pm1 = pc + (m + 1) * fo;
                        for (Eigen::Index i = 0; i < fo; ++i) t[i] = dk[i];
                        for (int blk : part) {
                            const double* zb = z.col(blk * n + j).data();
                            for (Eigen::Index i = 0; i < fo; ++i) t[i] *= zb[i];
                        }
                        for (Eigen::Index i = 0; i < fo; ++i) dzc[i] += t[i] * pm1[i];
                        for (Eigen::Index jj = 0; jj < m; ++jj) {
                            double* dst = dzc + part[static_cast<std::size_t>(jj)] * fo;
                            if (m == 1) {
                                for (Eigen::Index i = 0; i < fo; ++i) dst[i] += dk[i] * pm[i];
                                continue;
                            }
                            for (Eigen::Index i = 0; i < fo; ++i) t[i] = dk[i] * pm[i];
                            for (Eigen::Index q = 0; q < m; ++q) {
                                if (q == jj) continue;
                                const double* zb = z.col(part[static_cast<std::size_t>(q)] * n + j).data();
                                for (Eigen::Index i = 0; i < fo; ++i) t[i] *= zb[i];
                            }
                            for (Eigen::Index i = 0; i < fo; ++i) dst[i] += t[i];
                        }
                    }
                }
                for (Eigen::Index k = 0; k < nk; ++k) {
                    double* col = d.col(k * n + j).data();
                    const double* src = dzc + k * fo;
                    for (Eigen::Index i = 0; i < fo; ++i) col[i] = src[i];
                }
            }
        }
        const Eigen::MatrixXd& a = cache.inputs[li];
        Eigen::Map<Eigen::MatrixXd> gw(grad + l.offset, fo, fi);
        Eigen::Map<Eigen::VectorXd> gb(grad + l.offset + l.fan_in * l.fan_out, fo);
        gw.noalias() += d * a.transpose();
        gb += d.leftCols(n).rowwise().sum();
        if (li > 0) {
            Eigen::Map<const Eigen::MatrixXd> w(params + l.offset, fo, fi);
            Eigen::MatrixXd da(fi, nk * n);
            da.noalias() = w.transpose() * d;
            d = std::move(da);
        }
    }
}

// ---------------------------------------------------------------------------

ad::Var apply_ansatz(const AnsatzFactors& a, ad::Var raw, std::span<const ad::Var> coords) {
    ad::TapeBuilder& b = *raw.builder();
    const ad::Var g = b.splice(a.g.tape({}), coords);
    const ad::Var h = b.splice(a.h.tape({}), coords);
    return g + h * raw;
}

AnsatzFactors time_ansatz(const Domain& domain, const std::vector<CoordFunction>& initial) {
    if (domain.kind() != DomainKind::EvolutionTx)
        throw Error(ErrorCategory::Argument, "time ansatz needs a (t, x) domain");
    if (initial.empty() || initial.size() > 2)
        throw Error(ErrorCategory::Argument, "time ansatz supports first and second order in t only");
    const double t0 = domain.axis(0).lo, tf = domain.axis(0).hi;
    ad::TapeBuilder b;
    const ad::Var t = b.input(), x = b.input();
    const ad::Var at_t0[] = {b.constant(t0), x};
    const ad::Var s = (t - t0) / (tf - t0);
    ad::Var g = b.splice(initial[0].tape({}), at_t0);
    ad::Var h = s;
    if (initial.size() == 2) {
        g = g + b.splice(initial[1].tape({}), at_t0) * (t - t0);
        h = ad::pow(s, 2);
    }
    return {CoordFunction(b.build(g)), CoordFunction(b.build(h))};
}

AnsatzFactors ode_ivp_ansatz(const Domain& domain, std::span<const double> values) {
    if (values.empty()) throw Error(ErrorCategory::Argument, "ODE initial ansatz needs at least one value");
    const double t0 = domain.axis(0).lo, tf = domain.axis(0).hi;
    ad::TapeBuilder b;
    const ad::Var t = b.input();
    ad::Var g = b.constant(values[0]);
    for (std::size_t k = 1; k < values.size(); ++k)
        g = g + (values[k] / factorial(static_cast<int>(k))) * ad::pow(t - t0, static_cast<int>(k));
    const ad::Var h = ad::pow((t - t0) / (tf - t0), static_cast<int>(values.size()));
    return {CoordFunction(b.build(g)), CoordFunction(b.build(h))};
}

AnsatzFactors ode_bvp_ansatz(const Domain& domain, double ua, double ub) {
    const double t0 = domain.axis(0).lo, tf = domain.axis(0).hi;
    ad::TapeBuilder b;
    const ad::Var t = b.input();
    const ad::Var s = (t - t0) / (tf - t0);
    const ad::Var g = (1.0 - s) * ua + s * ub;
    const ad::Var h = s * (1.0 - s);
    return {CoordFunction(b.build(g)), CoordFunction(b.build(h))};
}

AnsatzFactors dirichlet_xy_ansatz(const Domain& domain, const std::array<CoordFunction, 4>& edges, double tol) {
    if (domain.kind() != DomainKind::SpatialXy)
        throw Error(ErrorCategory::Argument, "Dirichlet xy ansatz needs an (x, y) domain");
    const double xl = domain.axis(0).lo, xr = domain.axis(0).hi;
    const double yl = domain.axis(1).lo, yu = domain.axis(1).hi;
    auto at = [](const CoordFunction& f, double x, double y) { return f.value(std::array{x, y}); };
    const double gyl_xl = at(edges[2], xl, yl), gyl_xr = at(edges[2], xr, yl);
    const double gyu_xl = at(edges[3], xl, yu), gyu_xr = at(edges[3], xr, yu);
    const std::pair<double, double> corners[] = {
        {at(edges[0], xl, yl), gyl_xl}, {at(edges[0], xl, yu), gyu_xl},
        {at(edges[1], xr, yl), gyl_xr}, {at(edges[1], xr, yu), gyu_xr}};
    for (const auto& [f, g] : corners)
        if (!(std::fabs(f - g) <= tol))
            throw Error(ErrorCategory::Config, "Dirichlet edge functions disagree at a corner by " +
                                                   std::to_string(std::fabs(f - g)));

    ad::TapeBuilder b;
    const ad::Var x = b.input(), y = b.input();
    const ad::Var xs = (x - xl) / (xr - xl);
    const ad::Var ys = (y - yl) / (yu - yl);
    const ad::Var on_xl[] = {b.constant(xl), y}, on_xr[] = {b.constant(xr), y};
    const ad::Var on_yl[] = {x, b.constant(yl)}, on_yu[] = {x, b.constant(yu)};
    const ad::Var fxl = b.splice(edges[0].tape({}), on_xl);
    const ad::Var fxr = b.splice(edges[1].tape({}), on_xr);
    const ad::Var gyl = b.splice(edges[2].tape({}), on_yl);
    const ad::Var gyu = b.splice(edges[3].tape({}), on_yu);
    const ad::Var g = (1.0 - xs) * fxl + xs * fxr + (1.0 - ys) * (gyl - ((1.0 - xs) * gyl_xl + xs * gyl_xr)) +
                      ys * (gyu - ((1.0 - xs) * gyu_xl + xs * gyu_xr));
    const ad::Var h = xs * (1.0 - xs) * ys * (1.0 - ys);
    return {CoordFunction(b.build(g)), CoordFunction(b.build(h))};
}

ad::Var apply_time_ansatz(ad::Var raw, std::span<const ad::Var> coords, const Domain& domain,
                          const std::vector<CoordFunction>& initial) {
    return apply_ansatz(time_ansatz(domain, initial), raw, coords);
}

ad::Var apply_dirichlet_xy_ansatz(ad::Var raw, std::span<const ad::Var> coords, const Domain& domain,
                                  const std::array<CoordFunction, 4>& edges) {
    return apply_ansatz(dirichlet_xy_ansatz(domain, edges), raw, coords);
}

ad::Var apply_ode_ivp_ansatz(ad::Var raw, ad::Var t, const Domain& domain, std::span<const double> values) {
    const ad::Var c[] = {t};
    return apply_ansatz(ode_ivp_ansatz(domain, values), raw, c);
}

ad::Var apply_ode_bvp_ansatz(ad::Var raw, ad::Var t, const Domain& domain, double ua, double ub) {
    const ad::Var c[] = {t};
    return apply_ansatz(ode_bvp_ansatz(domain, ua, ub), raw, c);
}

Eigen::MatrixXd ansatz_jet(const KeySet& keys, Eigen::Index n, const Eigen::MatrixXd& g, const Eigen::MatrixXd& h,
                           const Eigen::MatrixXd& raw) {
    Eigen::MatrixXd u = g;
    for (std::size_t k = 0; k < keys.size(); ++k) {
        auto dst = u.middleCols(static_cast<Eigen::Index>(k) * n, n).array();
        for (const auto& [i, j] : keys.splits(k))
            dst += h.middleCols(i * n, n).array() * raw.middleCols(j * n, n).array();
    }
    return u;
}

Eigen::MatrixXd ansatz_jet_adjoint(const KeySet& keys, Eigen::Index n, const Eigen::MatrixXd& h,
                                   const Eigen::MatrixXd& d_u) {
    Eigen::MatrixXd d_raw = Eigen::MatrixXd::Zero(d_u.rows(), d_u.cols());
    for (std::size_t k = 0; k < keys.size(); ++k) {
        const auto src = d_u.middleCols(static_cast<Eigen::Index>(k) * n, n).array();
        for (const auto& [i, j] : keys.splits(k))
            d_raw.middleCols(j * n, n).array() += src * h.middleCols(i * n, n).array();
    }
    return d_raw;
}

// ---------------------------------------------------------------------------

std::string to_string(ProblemKind kind) {
    switch (kind) {
    case ProblemKind::OdeIvp: return "ode-ivp";
    case ProblemKind::OdeBvp: return "ode-bvp";
    case ProblemKind::OdeSystemIvp: return "ode-system-ivp";
    case ProblemKind::PdeTx: return "pde-tx";
    case ProblemKind::PdeXy: return "pde-xy";
    }
    return "?";
}

std::string to_string(ModelKind kind) { return kind == ModelKind::Pinn ? "pinn" : "deeponet"; }
std::string to_string(ConstraintMode mode) { return mode == ConstraintMode::Soft ? "soft" : "hard"; }

bool admissible(ProblemKind problem, ModelKind, BoundaryKind boundary, ConstraintMode mode) {
    if (mode == ConstraintMode::Soft) return true;
    switch (problem) {
    case ProblemKind::OdeIvp:
    case ProblemKind::OdeBvp: return true;
    case ProblemKind::OdeSystemIvp: return false;
    case ProblemKind::PdeTx: return boundary == BoundaryKind::Periodic;
    case ProblemKind::PdeXy: return boundary != BoundaryKind::Neumann;
    }
    return false;
}

void require_admissible(ProblemKind problem, ModelKind model, BoundaryKind boundary, ConstraintMode mode) {
    if (admissible(problem, model, boundary, mode)) return;
    std::string what = "hard constraints are not available for " + to_string(problem);
    if (problem == ProblemKind::PdeTx || problem == ProblemKind::PdeXy)
        what += " with " + to_string(boundary) + " boundaries";
    what += " (" + to_string(model) + "); the constraint availability matrix lists soft only";
    throw Error(ErrorCategory::Admissibility, what);
}

}  // namespace pinnsolve
