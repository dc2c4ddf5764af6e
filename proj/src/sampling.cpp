#include "mfcrit/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <stdexcept>
#include <vector>

#include <unsupported/Eigen/FFT>

#include "mfcrit/error.hpp"

namespace mfcrit {

namespace {

std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

Eigen::VectorXd standard_normals(std::size_t n, Rng& rng) {
    std::normal_distribution<double> normal;
    Eigen::VectorXd z(static_cast<Eigen::Index>(n));
    for (Eigen::Index i = 0; i < z.size(); ++i) z(i) = normal(rng);
    return z;
}

Eigen::MatrixXd fgn_cholesky(std::size_t n, double hurst) {
    Eigen::VectorXd col(static_cast<Eigen::Index>(n));
    for (std::size_t k = 0; k < n; ++k) col(static_cast<Eigen::Index>(k)) = fgn_autocovariance(k, hurst);
    Eigen::LLT<Eigen::MatrixXd> llt(toeplitz(col));
    if (llt.info() != Eigen::Success) {
        throw NumericalError("fGn covariance is not positive definite");
    }
    return llt.matrixL();
}

} // namespace

std::uint64_t replication_seed(std::uint64_t seed, std::uint64_t stream, std::uint64_t rep) {
    std::uint64_t state = seed;
    std::uint64_t h = splitmix64(state);
    state = h ^ (stream * 0xd1b54a32d192ed03ULL);
    h = splitmix64(state);
    state = h ^ (rep * 0x8cb92ba72f3d8dd7ULL);
    return splitmix64(state);
}

std::string_view backend_name(SamplerBackend backend) {
    switch (backend) {
    case SamplerBackend::direct:
        return "direct";
    case SamplerBackend::circulant_embedding:
        return "circulant-embedding";
    case SamplerBackend::cholesky:
        return "cholesky";
    }
    return "unknown";
}

FgnSampler::FgnSampler(std::size_t n, double hurst) : n_(n) {
    if (n == 0) throw std::domain_error("fGn length must be at least 1");
    if (!(hurst > 0.0 && hurst < 1.0)) throw std::domain_error("Hurst index must lie in (0, 1)");
    if (n == 1) {
        backend_ = SamplerBackend::direct;
        return;
    }

    const std::size_t m = 2 * (n - 1);
    std::vector<double> c(m);
    for (std::size_t k = 0; k < n; ++k) c[k] = fgn_autocovariance(k, hurst);
    for (std::size_t k = n; k < m; ++k) c[k] = c[m - k];

    Eigen::FFT<double> fft;
    std::vector<std::complex<double>> lambda;
    fft.fwd(lambda, c);

    double largest = 0.0;
    double smallest = 0.0;
    for (const auto& l : lambda) {
        largest = std::max(largest, l.real());
        smallest = std::min(smallest, l.real());
    }
    if (smallest < -1e-10 * largest) {
        backend_ = SamplerBackend::cholesky;
        cholesky_ = fgn_cholesky(n, hurst);
        return;
    }

    backend_ = SamplerBackend::circulant_embedding;
    amplitude_.resize(static_cast<Eigen::Index>(m));
    for (std::size_t k = 0; k < m; ++k) {
        amplitude_(static_cast<Eigen::Index>(k)) =
            std::sqrt(std::max(lambda[k].real(), 0.0) / static_cast<double>(m));
    }
}

Eigen::VectorXd FgnSampler::draw(Rng& rng) const {
    switch (backend_) {
    case SamplerBackend::direct:
        return standard_normals(1, rng);
    case SamplerBackend::cholesky:
        return cholesky_ * standard_normals(n_, rng);
    case SamplerBackend::circulant_embedding:
        break;
    }
    const auto m = static_cast<std::size_t>(amplitude_.size());
    std::normal_distribution<double> normal;
    std::vector<std::complex<double>> w(m);
    for (std::size_t k = 0; k < m; ++k) {
        const double re = normal(rng);
        const double im = normal(rng);
        w[k] = amplitude_(static_cast<Eigen::Index>(k)) * std::complex<double>(re, im);
    }
    Eigen::FFT<double> fft;
    std::vector<std::complex<double>> out;
    fft.fwd(out, w);
    Eigen::VectorXd x(static_cast<Eigen::Index>(n_));
    for (std::size_t j = 0; j < n_; ++j) x(static_cast<Eigen::Index>(j)) = out[j].real();
    return x;
}

Eigen::VectorXd sample_fgn_cholesky(std::size_t n, double hurst, Rng& rng) {
    return fgn_cholesky(n, hurst) * standard_normals(n, rng);
}

FgnSample sample_fgn(std::size_t n, double hurst, std::uint64_t seed) {
    FgnSampler sampler(n, hurst);
    Rng rng(seed);
    return {sampler.draw(rng), sampler.backend()};
}

MfbmSampler::MfbmSampler(const MfbmParams& params, const SamplingDesign& design)
    : params_(params), design_(design), fgn_((params.validate(), design.n()), params.hurst) {}

Eigen::VectorXd MfbmSampler::draw(std::uint64_t seed) const {
    Rng fractional(replication_seed(seed, 0, 0));
    Rng brownian(replication_seed(seed, 1, 0));
    const double delta = design_.delta();
    Eigen::VectorXd x = std::sqrt(delta) * standard_normals(design_.n(), brownian);
    if (params_.sigma != 0.0) {
        x += params_.sigma * std::pow(delta, params_.hurst) * fgn_.draw(fractional);
    }
    return x;
}

Eigen::VectorXd sample_mfbm_increments(const MfbmParams& params, const SamplingDesign& design,
                                       std::uint64_t seed) {
    return MfbmSampler(params, design).draw(seed);
}

MfouSampler::MfouSampler(const MfouParams& params, const SamplingDesign& design) {
    Eigen::LLT<Eigen::MatrixXd> llt(mfou_covariance(params, design));
    if (llt.info() != Eigen::Success) {
        throw NumericalError("mfOU covariance is not positive definite");
    }
    lower_ = llt.matrixL();
}

Eigen::VectorXd MfouSampler::draw(std::uint64_t seed) const {
    Rng rng(seed);
    return lower_ * standard_normals(static_cast<std::size_t>(lower_.rows()), rng);
}

Eigen::VectorXd sample_mfou_path(const MfouParams& params, const SamplingDesign& design,
                                 std::uint64_t seed) {
    return MfouSampler(params, design).draw(seed);
}

Eigen::VectorXd SimulationSpec::simulate() const {
    const std::uint64_t sub = replication_seed(seed, 2, replication);
    if (const auto* m = std::get_if<MfbmParams>(&params)) {
        return sample_mfbm_increments(*m, design, sub);
    }
    return sample_mfou_path(std::get<MfouParams>(params), design, sub);
}

} // namespace mfcrit
