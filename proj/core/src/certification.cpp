#include <cmath>
#include <limits>

#include "dmalab/barriers.hpp"
#include "dmalab/errors.hpp"
#include "dmalab/report.hpp"

namespace dmalab {

namespace {

constexpr double kSlack = 1e-9;

std::vector<Vec> ball_samples(const ConvexDomain& domain, const Vec& center, double R, std::size_t count) {
    const int n = static_cast<int>(center.size());
    std::vector<Vec> out;
    out.reserve(count);
    const std::uint64_t limit = 400 * static_cast<std::uint64_t>(count) + 1000;
    for (std::uint64_t i = 0; i < limit && out.size() < count; ++i) {
        Vec p = center + R * (2.0 * halton_point(i, n).array() - 1.0).matrix();
        if ((p - center).norm() >= R) continue;
        if (!domain.contains(p, 0.0) || domain.signed_distance(p) <= 0.0) continue;
        out.push_back(std::move(p));
    }
    return out;
}

std::vector<Vec> sphere_points(const Vec& center, double R, std::size_t count) {
    std::vector<Vec> out;
    for (std::size_t k = 0; k < count; ++k) {
        out.push_back(center + R * unit_direction(k, count, static_cast<int>(center.size())));
    }
    return out;
}

}  // namespace

nlohmann::json BarrierCertificate::to_json() const {
    return {{"family", family},
            {"side", to_string(side)},
            {"passed", passed},
            {"inequality_ok", inequality_ok},
            {"boundary_ok", boundary_ok},
            {"covers_domain", covers_domain},
            {"min_H", min_H},
            {"max_H", max_H},
            {"worst_point", vec_to_json(worst_point)},
            {"samples", samples},
            {"boundary_samples", boundary_samples},
            {"max_boundary_value", max_boundary_value},
            {"flags", flags}};
}

BarrierCertificate verify_subsolution(const Barrier& barrier, const PowerLawRHS& F, const ConvexDomain& domain,
                                      std::size_t n_samples) {
    if (barrier.dimension() != domain.dimension()) throw ParameterError("verify_subsolution: dimension mismatch");
    BarrierCertificate cert;
    cert.family = barrier.family();
    cert.side = barrier.side();
    cert.flags = barrier.flags();
    cert.min_H = std::numeric_limits<double>::infinity();
    cert.max_H = -std::numeric_limits<double>::infinity();

    const bool super = barrier.side() == BarrierSide::Super;
    const auto* sphere = dynamic_cast<const SphereBarrier*>(&barrier);
    if (super && !sphere) throw ParameterError("verify_subsolution: super-solutions are sphere barriers");

    const auto points = super ? ball_samples(domain, sphere->center, sphere->R, n_samples)
                              : domain.interior_samples(n_samples);
    const double worst_init = super ? -std::numeric_limits<double>::infinity() : std::numeric_limits<double>::infinity();
    double worst = worst_init;
    for (const auto& x : points) {
        if (!barrier.in_region(x)) {
            cert.covers_domain = false;
            cert.worst_point = x;
            continue;
        }
        const BarrierEval e = barrier.evaluate(x);
        if (!(e.value < 0.0)) {
            cert.covers_domain = false;
            cert.worst_point = x;
            continue;
        }
        const double f = F(x, e.value);
        const double H = e.det / f;
        ++cert.samples;
        cert.min_H = std::min(cert.min_H, H);
        cert.max_H = std::max(cert.max_H, H);
        const bool worse = super ? H > worst : H < worst;
        if (worse && cert.covers_domain) {
            worst = H;
            cert.worst_point = x;
        }
    }
    cert.inequality_ok = cert.samples > 0 && (super ? cert.max_H <= 1.0 + kSlack : cert.min_H >= 1.0 - kSlack);

    const auto boundary = super ? sphere_points(sphere->center, sphere->R, 1024) : domain.boundary_samples(1024);
    cert.boundary_ok = true;
    cert.max_boundary_value = -std::numeric_limits<double>::infinity();
    for (const auto& z : boundary) {
        double w = 0.0;
        try {
            w = barrier.value(z);
        } catch (const BarrierDomainError&) {
            cert.boundary_ok = false;
            continue;
        }
        ++cert.boundary_samples;
        cert.max_boundary_value = std::max(cert.max_boundary_value, w);
        if (w > 1e-12) cert.boundary_ok = false;
    }
    cert.passed = cert.inequality_ok && cert.boundary_ok && cert.covers_domain;
    return cert;
}

FdCheck hessian_fd_check(const Barrier& barrier, const std::vector<Vec>& points, double h) {
    if (!(h > 0.0)) throw ParameterError("hessian_fd_check: h must be positive");
    using LMat = Eigen::Matrix<long double, Eigen::Dynamic, Eigen::Dynamic>;
    const int n = barrier.dimension();
    FdCheck out;
    const long double hl = h;
    for (const auto& x : points) {
        if (!barrier.in_region(x) || barrier.singular_distance(x) < 10.0 * h) {
            ++out.skipped;
            continue;
        }
        std::vector<long double> base(x.data(), x.data() + n);
        auto W = [&](int i, int si, int j, int sj) {
            std::vector<long double> p = base;
            if (i >= 0) p[i] += si * hl;
            if (j >= 0) p[j] += sj * hl;
            return barrier.value_extended(p);
        };
        LMat H(n, n);
        const long double w0 = W(-1, 0, -1, 0);
        for (int i = 0; i < n; ++i) {
            H(i, i) = (W(i, 1, -1, 0) - 2.0L * w0 + W(i, -1, -1, 0)) / (hl * hl);
            for (int j = i + 1; j < n; ++j) {
                H(i, j) = (W(i, 1, j, 1) - W(i, 1, j, -1) - W(i, -1, j, 1) + W(i, -1, j, -1)) / (4.0L * hl * hl);
                H(j, i) = H(i, j);
            }
        }
        const long double fd = H.determinant();
        const double closed = barrier.evaluate(x).det;
        const double err = static_cast<double>(std::abs(fd - closed) / std::abs(static_cast<long double>(closed)));
        ++out.evaluated;
        if (err > out.max_rel_error || out.worst_point.size() == 0) {
            out.max_rel_error = std::max(out.max_rel_error, err);
            out.worst_point = x;
        }
    }
    return out;
}

}  // namespace dmalab
