#include "pinnsolve/geometry.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numbers>
#include <limits>
#include <numeric>

#include "pinnsolve/errors.hpp"

namespace pinnsolve {

namespace {

void check_interval(const Interval& iv, const char* name) {
    if (!std::isfinite(iv.lo) || !std::isfinite(iv.hi) || !(iv.hi > iv.lo))
        throw Error(ErrorCategory::Config, std::string("interval ") + name + " must have positive length");
}

int edge_ordinal(Edge e) { return static_cast<int>(e); }

}  // namespace

Domain::Domain(DomainKind kind, std::vector<Interval> axes, std::vector<std::string> names)
    : kind_(kind), axes_(std::move(axes)), names_(std::move(names)) {
    for (std::size_t i = 0; i < axes_.size(); ++i) check_interval(axes_[i], names_[i].c_str());
}

Domain Domain::ode(double t0, double tf) { return Domain(DomainKind::OdeTime, {{t0, tf}}, {"t"}); }

Domain Domain::evolution(double t0, double tf, double xl, double xr) {
    return Domain(DomainKind::EvolutionTx, {{t0, tf}, {xl, xr}}, {"t", "x"});
}

Domain Domain::spatial(double xl, double xr, double yl, double yu) {
    return Domain(DomainKind::SpatialXy, {{xl, xr}, {yl, yu}}, {"x", "y"});
}

bool Domain::contains(std::span<const double> point, double tol) const {
    if (point.size() != axes_.size()) return false;
    for (std::size_t i = 0; i < axes_.size(); ++i)
        if (!(point[i] >= axes_[i].lo - tol && point[i] <= axes_[i].hi + tol)) return false;
    return true;
}

std::vector<Edge> boundary_edges(const Domain& domain) {
    switch (domain.kind()) {
    case DomainKind::OdeTime: return {Edge::T0, Edge::TF};
    case DomainKind::EvolutionTx: return {Edge::XL, Edge::XR};
    case DomainKind::SpatialXy: return {Edge::XL, Edge::XR, Edge::YL, Edge::YU};
    }
    return {};
}

EdgeInfo edge_info(const Domain& domain, Edge edge) {
    const bool tx = domain.kind() == DomainKind::EvolutionTx;
    switch (edge) {
    case Edge::T0: return {0, false, -1.0};
    case Edge::TF: return {0, true, 1.0};
    case Edge::XL: return {tx ? 1u : 0u, false, -1.0};
    case Edge::XR: return {tx ? 1u : 0u, true, 1.0};
    case Edge::YL: return {1, false, -1.0};
    case Edge::YU: return {1, true, 1.0};
    }
    return {0, false, 0.0};
}

std::string edge_name(Edge edge) {
    switch (edge) {
    case Edge::T0: return "t0";
    case Edge::TF: return "tf";
    case Edge::XL: return "xl";
    case Edge::XR: return "xr";
    case Edge::YL: return "yl";
    case Edge::YU: return "yu";
    }
    return "?";
}

std::string to_string(BoundaryKind kind) {
    switch (kind) {
    case BoundaryKind::Periodic: return "periodic";
    case BoundaryKind::Dirichlet: return "dirichlet";
    case BoundaryKind::Neumann: return "neumann";
    }
    return "?";
}

const std::string& BoundarySpec::condition(Edge edge) const {
    if (auto it = edges.find(edge); it != edges.end()) return it->second;
    if (all_edges) return *all_edges;
    throw Error(ErrorCategory::Config, "no boundary condition for edge " + edge_name(edge));
}

void BoundarySpec::validate(const Domain& domain) const {
    if (kind == BoundaryKind::Periodic) {
        if (!edges.empty() || all_edges)
            throw Error(ErrorCategory::Config, "periodic boundaries take no condition functions");
        if (domain.kind() == DomainKind::OdeTime)
            throw Error(ErrorCategory::Config, "periodic boundaries need a spatial axis");
        return;
    }
    if (points < 1) throw Error(ErrorCategory::Config, "boundary point count must be positive");
    if (domain.kind() == DomainKind::OdeTime && kind == BoundaryKind::Neumann)
        throw Error(ErrorCategory::Config, "ODE boundary values must be dirichlet");
    const auto relevant = boundary_edges(domain);
    for (const auto& [e, src] : edges) {
        (void)src;
        if (std::find(relevant.begin(), relevant.end(), e) == relevant.end())
            throw Error(ErrorCategory::Config, "edge " + edge_name(e) + " is not a boundary of this domain");
    }
    for (Edge e : relevant) (void)condition(e);
}

void SensorConfig::validate() const {
    if (sensors < 1) throw Error(ErrorCategory::Config, "sensor count must be at least 1");
    if (samples < 1) throw Error(ErrorCategory::Config, "function-sample count must be at least 1");
    if (channels < 1) throw Error(ErrorCategory::Config, "sensor channel count must be at least 1");
    if (modes < 0) throw Error(ErrorCategory::Config, "Fourier mode count must be nonnegative");
    if (!std::isfinite(lo) || !std::isfinite(hi) || lo > hi)
        throw Error(ErrorCategory::Config, "sensor range must satisfy lo <= hi");
    if (lo == hi && lo != 0.0)
        throw Error(ErrorCategory::Config, "sensor range must satisfy lo < hi");
}

// ---------------------------------------------------------------------------

FunctionFamily::FunctionFamily(Basis basis, double xl, double xr, int modes)
    : basis_(basis), xl_(xl), xr_(xr), modes_(modes) {
    if (!(xr > xl)) throw Error(ErrorCategory::Argument, "function family interval must have positive length");
    if (modes < 0) throw Error(ErrorCategory::Argument, "negative mode count");
}

std::size_t FunctionFamily::dim() const noexcept {
    const auto m = static_cast<std::size_t>(modes_);
    return basis_ == Basis::Fourier ? 1 + 2 * m : 1 + m;
}

double FunctionFamily::basis_value(std::size_t j, double x) const {
    if (j == 0) return 1.0;
    const double s = (x - xl_) / (xr_ - xl_);
    constexpr double pi = std::numbers::pi;
    switch (basis_) {
    case Basis::Fourier: {
        const double k = static_cast<double>((j + 1) / 2);
        return j % 2 == 1 ? std::cos(2.0 * pi * k * s) : std::sin(2.0 * pi * k * s);
    }
    case Basis::Sine: return std::sin(pi * static_cast<double>(j) * s);
    case Basis::Cosine: return std::cos(pi * static_cast<double>(j) * s);
    }
    return 0.0;
}

double FunctionFamily::value(const Eigen::VectorXd& coeffs, double x) const {
    double v = 0.0;
    for (std::size_t j = 0; j < dim(); ++j) v += coeffs[static_cast<Eigen::Index>(j)] * basis_value(j, x);
    return v;
}

ad::Var FunctionFamily::build(const Eigen::VectorXd& coeffs, ad::Var x) const {
    ad::TapeBuilder& b = *x.builder();
    constexpr double pi = std::numbers::pi;
    const ad::Var s = (x - xl_) / (xr_ - xl_);
    ad::Var sum = b.constant(coeffs[0]);
    for (std::size_t j = 1; j < dim(); ++j) {
        const double c = coeffs[static_cast<Eigen::Index>(j)];
        if (c == 0.0) continue;
        ad::Var phi;
        switch (basis_) {
        case Basis::Fourier: {
            const double k = static_cast<double>((j + 1) / 2);
            phi = j % 2 == 1 ? ad::cos(2.0 * pi * k * s) : ad::sin(2.0 * pi * k * s);
            break;
        }
        case Basis::Sine: phi = ad::sin(pi * static_cast<double>(j) * s); break;
        case Basis::Cosine: phi = ad::cos(pi * static_cast<double>(j) * s); break;
        }
        sum = sum + c * phi;
    }
    return sum;
}

Eigen::VectorXd FunctionFamily::fit(std::span<const double> locations, std::span<const double> values) const {
    if (locations.size() != values.size() || locations.empty())
        throw Error(ErrorCategory::Argument, "fit: locations and values must be nonempty and equal length");
    const auto n = static_cast<Eigen::Index>(locations.size());
    const auto d = static_cast<Eigen::Index>(dim());
    Eigen::MatrixXd a(n, d);
    Eigen::VectorXd y(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < d; ++j)
            a(i, j) = basis_value(static_cast<std::size_t>(j), locations[static_cast<std::size_t>(i)]);
        y[i] = values[static_cast<std::size_t>(i)];
    }
    return a.completeOrthogonalDecomposition().solve(y);
}

Eigen::VectorXd FunctionFamily::draw(Rng& rng) const {
    Eigen::VectorXd c(static_cast<Eigen::Index>(dim()));
    for (std::size_t j = 0; j < dim(); ++j) {
        const std::size_t k = basis_ == Basis::Fourier ? (j + 1) / 2 : j;
        c[static_cast<Eigen::Index>(j)] = rng.normal() / static_cast<double>(std::max<std::size_t>(1, k));
    }
    if (basis_ == Basis::Sine) c[0] = 0.0;
    return c;
}

FunctionFamily family_for(BoundaryKind kind, double xl, double xr, int modes) {
    switch (kind) {
    case BoundaryKind::Periodic: return {FunctionFamily::Basis::Fourier, xl, xr, modes};
    case BoundaryKind::Dirichlet: return {FunctionFamily::Basis::Sine, xl, xr, modes};
    case BoundaryKind::Neumann: return {FunctionFamily::Basis::Cosine, xl, xr, modes};
    }
    return {FunctionFamily::Basis::Fourier, xl, xr, modes};
}

// ---------------------------------------------------------------------------

std::size_t stratum(double v, const Interval& iv, std::size_t n) {
    const double r = (v - iv.lo) / iv.length() * static_cast<double>(n);
    if (!(r > 0.0)) return 0;
    return std::min(n - 1, static_cast<std::size_t>(std::floor(r)));
}

Eigen::MatrixXd latin_hypercube(std::size_t n, std::span<const Interval> bounds, std::uint64_t seed,
                                std::uint64_t stream) {
    if (n == 0) throw Error(ErrorCategory::Argument, "latin_hypercube: n must be positive");
    Rng rng(seed, stream);
    Eigen::MatrixXd pts(static_cast<Eigen::Index>(bounds.size()), static_cast<Eigen::Index>(n));
    std::vector<std::size_t> perm(n);
    for (std::size_t d = 0; d < bounds.size(); ++d) {
        const Interval& iv = bounds[d];
        std::iota(perm.begin(), perm.end(), std::size_t{0});
        for (std::size_t i = n; i > 1; --i) std::swap(perm[i - 1], perm[rng.below(i)]);
        for (std::size_t i = 0; i < n; ++i) {
            const std::size_t s = perm[i];
            double v = iv.lo + (static_cast<double>(s) + rng.uniform()) / static_cast<double>(n) * iv.length();
            v = std::clamp(v, iv.lo, iv.hi);
            // Rounding can push a value across a stratum edge; walk it back.
            while (stratum(v, iv, n) > s) v = std::nextafter(v, iv.lo);
            while (stratum(v, iv, n) < s) v = std::nextafter(v, iv.hi);
            pts(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(i)) = v;
        }
    }
    return pts;
}

Eigen::MatrixXd sample_residual_points(const Domain& domain, std::size_t n, std::uint64_t seed,
                                       std::uint64_t stream) {
    return latin_hypercube(n, domain.axes(), seed, stream);
}

Eigen::MatrixXd sample_initial_points(const Domain& domain, const InitialSpec& spec, std::uint64_t seed,
                                      std::uint64_t stream) {
    const double t0 = domain.axis(0).lo;
    switch (domain.kind()) {
    case DomainKind::OdeTime: return Eigen::MatrixXd::Constant(1, 1, t0);
    case DomainKind::EvolutionTx: {
        if (spec.points < 1) throw Error(ErrorCategory::Config, "initial point count must be positive");
        const Interval xs[] = {domain.axis(1)};
        Eigen::MatrixXd pts(2, spec.points);
        pts.row(0).setConstant(t0);
        pts.row(1) = latin_hypercube(static_cast<std::size_t>(spec.points), xs, seed, stream);
        return pts;
    }
    case DomainKind::SpatialXy: break;
    }
    throw Error(ErrorCategory::Argument, "spatial domains have no initial slice");
}

BoundaryPoints sample_boundary_points(const Domain& domain, const BoundarySpec& spec, std::uint64_t seed,
                                      std::uint64_t stream) {
    if (spec.kind == BoundaryKind::Periodic)
        throw Error(ErrorCategory::Argument, "periodic boundaries have no boundary points");
    spec.validate(domain);
    const auto edges = boundary_edges(domain);
    const std::size_t per_edge = domain.kind() == DomainKind::OdeTime ? 1 : static_cast<std::size_t>(spec.points);
    const auto dims = static_cast<Eigen::Index>(domain.dims());
    BoundaryPoints out;
    out.points.resize(dims, static_cast<Eigen::Index>(per_edge * edges.size()));
    out.targets.resize(out.points.cols());
    Eigen::Index col = 0;
    for (Edge e : edges) {
        const EdgeInfo info = edge_info(domain, e);
        const Interval& fixed = domain.axis(info.axis);
        Eigen::MatrixXd free;
        if (dims > 1) {
            const Interval along[] = {domain.axis(1 - info.axis)};
            free = latin_hypercube(per_edge, along, seed, stream + static_cast<std::uint64_t>(edge_ordinal(e)));
        }
        const auto g = CoordFunction::parse(expr::normalize_source(spec.condition(e)), domain.axis_names());
        for (std::size_t i = 0; i < per_edge; ++i, ++col) {
            out.points(static_cast<Eigen::Index>(info.axis), col) = info.upper ? fixed.hi : fixed.lo;
            if (dims > 1) out.points(static_cast<Eigen::Index>(1 - info.axis), col) = free(0, static_cast<Eigen::Index>(i));
            out.edges.push_back(e);
        }
        const Eigen::Index first = col - static_cast<Eigen::Index>(per_edge);
        out.targets.segment(first, static_cast<Eigen::Index>(per_edge)) =
            g.evaluate({}, out.points.middleCols(first, static_cast<Eigen::Index>(per_edge)));
    }
    return out;
}

std::vector<double> sensor_locations(double xl, double xr, int n, bool periodic) {
    if (n < 1) throw Error(ErrorCategory::Argument, "sensor count must be positive");
    std::vector<double> loc(static_cast<std::size_t>(n));
    if (n == 1 && !periodic) {
        loc[0] = 0.5 * (xl + xr);
        return loc;
    }
    const double h = (xr - xl) / static_cast<double>(periodic ? n : n - 1);
    for (int i = 0; i < n; ++i) loc[static_cast<std::size_t>(i)] = xl + h * static_cast<double>(i);
    if (!periodic) loc.back() = xr;
    return loc;
}

SensorSet sample_sensors(const SensorConfig& config, const std::optional<FunctionFamily>& family,
                         const std::vector<double>& locations) {
    config.validate();
    SensorSet set;
    set.locations = locations;
    Rng rng(config.seed, streams::kSensors);
    const auto samples = static_cast<Eigen::Index>(config.samples);

    if (config.family == SensorFamily::ScalarTuple) {
        set.values.resize(config.sensors * config.channels, samples);
        for (Eigen::Index s = 0; s < samples; ++s)
            for (Eigen::Index r = 0; r < set.values.rows(); ++r) set.values(r, s) = rng.uniform(config.lo, config.hi);
        return set;
    }

    if (!family) throw Error(ErrorCategory::Argument, "series sensors need a function family");
    if (locations.size() != static_cast<std::size_t>(config.sensors))
        throw Error(ErrorCategory::Argument, "sensor location count does not match the sensor config");
    set.family = family;
    const auto ns = static_cast<Eigen::Index>(config.sensors);
    set.values.resize(ns * config.channels, samples);
    set.coefficients.resize(static_cast<std::size_t>(config.samples));
    const bool zero_range = config.lo == 0.0 && config.hi == 0.0;
    const bool spans_zero = config.lo <= 0.0 && config.hi >= 0.0;

    Eigen::VectorXd f(ns);
    for (Eigen::Index s = 0; s < samples; ++s) {
        auto& per_channel = set.coefficients[static_cast<std::size_t>(s)];
        for (int c = 0; c < config.channels; ++c) {
            Eigen::VectorXd coeffs = family->draw(rng);
            const double u = 1.0 - rng.uniform();  // (0, 1]
            for (Eigen::Index i = 0; i < ns; ++i) f[i] = family->value(coeffs, locations[static_cast<std::size_t>(i)]);
            const double fmin = f.minCoeff();
            const double fmax = f.maxCoeff();
            if (zero_range) {
                coeffs.setZero();
            } else if (spans_zero) {
                double cmax = std::numeric_limits<double>::infinity();
                if (fmax > 0.0) cmax = std::min(cmax, config.hi / fmax);
                if (fmin < 0.0) cmax = std::min(cmax, config.lo / fmin);
                if (std::isfinite(cmax)) coeffs *= u * cmax;
            } else if (fmax > fmin) {
                const double a = (config.hi - config.lo) / (fmax - fmin);
                coeffs *= a;
                coeffs[0] += config.lo - a * fmin;
            } else {
                coeffs.setZero();
                coeffs[0] = config.lo + u * (config.hi - config.lo);
            }
            for (Eigen::Index i = 0; i < ns; ++i) {
                const double v = family->value(coeffs, locations[static_cast<std::size_t>(i)]);
                set.values(c * ns + i, s) = std::clamp(v, config.lo, config.hi);
            }
            per_channel.push_back(std::move(coeffs));
        }
    }
    return set;
}

}  // namespace pinnsolve
