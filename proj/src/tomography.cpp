#include "sqzmem/tomography.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <string>

#include "sqzmem/channel.hpp"
#include "sqzmem/errors.hpp"
#include "sqzmem/oscillator.hpp"
#include "sqzmem/parallel.hpp"
#include "sqzmem/quadrature.hpp"

namespace sqzmem {

namespace {

constexpr double pi = std::numbers::pi;

/// Record reduced to phase in [0, pi) and absolute-unit x.
struct Sample {
    double theta;
    double x;
};

Sample canonical(const QuadratureRecord& r) {
    double th = std::fmod(r.phase, 2.0 * pi);
    if (th < 0.0) th += 2.0 * pi;
    double x = r.value / std::numbers::sqrt2;
    if (th >= pi) {
        th -= pi;
        x = -x;
    }
    if (th >= pi) th = 0.0;
    return {th, x};
}

MatrixC phase_factors(double theta, int dim) {
    MatrixC e(dim, dim);
    for (int m = 0; m < dim; ++m) {
        for (int n = 0; n < dim; ++n) e(m, n) = std::polar(1.0, (m - n) * theta);
    }
    return e;
}

struct PhaseGroup {
    double theta;
    MatrixR psi;     // rows: occupied x bins
    VectorR counts;
    MatrixC phases;  // e^{i (m - n) theta}
};

/// Likelihood engine: binned groups sharing wavefunction rows plus exact records.
class Engine {
public:
    Engine(std::span<const QuadratureRecord> records, const ReconstructionOptions& opts) : dim_(opts.dim) {
        std::vector<Sample> samples;
        samples.reserve(records.size());
        for (const auto& r : records) {
            if (!std::isfinite(r.value) || !std::isfinite(r.phase)) {
                throw InvalidParameterError("quadrature record is not finite");
            }
            samples.push_back(canonical(r));
            if (std::abs(samples.back().x) > max_quadrature_abs) {
                throw GridOutOfRangeError("quadrature value " + std::to_string(r.value) + " SNL is beyond |x| <= 8");
            }
        }
        total_ = static_cast<double>(samples.size());

        if (opts.use_binning(samples.size())) {
            build_binned(samples, opts.binning);
        } else {
            build_exact(samples);
        }
    }

    double total() const { return total_; }

    /// Log-likelihood at rho and, if wanted, the R operator (unnormalized).
    double evaluate(const MatrixC& rho, MatrixC* r_out) const {
        const std::int64_t jobs = static_cast<std::int64_t>(groups_.size()) + 1;
        constexpr std::int64_t block = 8;
        const std::int64_t nblocks = block_count(jobs, block);
        std::vector<double> part_l(nblocks, 0.0);
        std::vector<MatrixC> part_r(r_out ? nblocks : 0, MatrixC::Zero(dim_, dim_));
        parallel_blocks(jobs, block, worker_count(), [&](std::int64_t b, std::int64_t begin, std::int64_t end) {
            for (std::int64_t j = begin; j < end; ++j) {
                if (j < static_cast<std::int64_t>(groups_.size())) {
                    part_l[b] += group_term(groups_[j], rho, r_out ? &part_r[b] : nullptr);
                } else {
                    part_l[b] += exact_term(rho, r_out ? &part_r[b] : nullptr);
                }
            }
        });
        double l = 0.0;
        for (double v : part_l) l += v;
        if (r_out) {
            r_out->setZero(dim_, dim_);
            for (const auto& m : part_r) *r_out += m;
        }
        return l;
    }

private:
    void build_binned(const std::vector<Sample>& samples, const XBinning& binning) {
        const int nb = binning.bins;
        const double width = 2.0 * binning.range_abs / nb;
        MatrixR centres(nb, dim_);
        for (int i = 0; i < nb; ++i) {
            const double c = -binning.range_abs + (i + 0.5) * width;
            centres.row(i) = oscillator_wavefunctions(c, dim_).transpose();
        }

        std::vector<std::vector<double>> counts(binning.phase_bins, std::vector<double>(nb, 0.0));
        std::vector<double> phase_sum(binning.phase_bins, 0.0), phase_n(binning.phase_bins, 0.0);
        std::vector<Sample> outside;
        for (const auto& s : samples) {
            const int pb = std::min(binning.phase_bins - 1, static_cast<int>(s.theta / pi * binning.phase_bins));
            const double u = (s.x + binning.range_abs) / width;
            if (u < 0.0 || u >= nb) {
                outside.push_back(s);
                continue;
            }
            counts[pb][static_cast<int>(u)] += 1.0;
            phase_sum[pb] += s.theta;
            phase_n[pb] += 1.0;
        }
        for (int pb = 0; pb < binning.phase_bins; ++pb) {
            if (phase_n[pb] == 0.0) continue;
            std::vector<int> rows;
            for (int i = 0; i < nb; ++i) {
                if (counts[pb][i] > 0.0) rows.push_back(i);
            }
            PhaseGroup g;
            g.theta = phase_sum[pb] / phase_n[pb];
            g.psi.resize(static_cast<Eigen::Index>(rows.size()), dim_);
            g.counts.resize(static_cast<Eigen::Index>(rows.size()));
            for (std::size_t k = 0; k < rows.size(); ++k) {
                g.psi.row(static_cast<Eigen::Index>(k)) = centres.row(rows[k]);
                g.counts(static_cast<Eigen::Index>(k)) = counts[pb][rows[k]];
            }
            g.phases = phase_factors(g.theta, dim_);
            groups_.push_back(std::move(g));
        }
        build_exact(outside);
    }

    void build_exact(const std::vector<Sample>& samples) {
        exact_.resize(static_cast<Eigen::Index>(samples.size()), dim_);
        for (std::size_t j = 0; j < samples.size(); ++j) {
            const VectorR psi = oscillator_wavefunctions(samples[j].x, dim_);
            for (int m = 0; m < dim_; ++m) {
                exact_(static_cast<Eigen::Index>(j), m) = psi(m) * std::polar(1.0, m * samples[j].theta);
            }
        }
    }

    double group_term(const PhaseGroup& g, const MatrixC& rho, MatrixC* r) const {
        // p = psi^T S psi with S_mn = Re(rho_mn e^{i (n - m) theta}).
        const MatrixR s = rho.cwiseProduct(g.phases.conjugate()).real();
        const VectorR p = (g.psi * s).cwiseProduct(g.psi).rowwise().sum();
        double l = 0.0;
        VectorR w(p.size());
        for (Eigen::Index i = 0; i < p.size(); ++i) {
            const double pi_ = std::max(p(i), 1e-300);
            l += g.counts(i) * std::log(pi_);
            w(i) = g.counts(i) / pi_;
        }
        if (r) {
            const MatrixR a = g.psi.transpose() * w.asDiagonal() * g.psi;
            *r += a.cast<cplx>().cwiseProduct(g.phases);
        }
        return l;
    }

    double exact_term(const MatrixC& rho, MatrixC* r) const {
        if (exact_.rows() == 0) return 0.0;
        const VectorR p = (exact_.conjugate() * rho).cwiseProduct(exact_).rowwise().sum().real();
        double l = 0.0;
        VectorR w(p.size());
        for (Eigen::Index i = 0; i < p.size(); ++i) {
            const double pi_ = std::max(p(i), 1e-300);
            l += std::log(pi_);
            w(i) = 1.0 / pi_;
        }
        if (r) *r += exact_.transpose() * w.cast<cplx>().asDiagonal() * exact_.conjugate();
        return l;
    }

    int dim_;
    double total_ = 0.0;
    std::vector<PhaseGroup> groups_;
    MatrixC exact_;  // rows v_j = psi(x_j) e^{i m theta_j}
};

void check_coverage(std::span<const QuadratureRecord> records, const XBinning& binning) {
    if (records.size() < 1000) {
        throw InsufficientSamplesError("reconstruction needs at least 1000 records, got " +
                                       std::to_string(records.size()));
    }
    std::vector<bool> occupied(binning.phase_bins, false);
    double lo = records.front().value, hi = lo;
    for (const auto& r : records) {
        const Sample s = canonical(r);
        occupied[std::min(binning.phase_bins - 1, static_cast<int>(s.theta / pi * binning.phase_bins))] = true;
        lo = std::min(lo, r.value);
        hi = std::max(hi, r.value);
    }
    const auto n = std::count(occupied.begin(), occupied.end(), true);
    if (n < 10) {
        throw InsufficientCoverageError("phases occupy only " + std::to_string(n) + " of " +
                                        std::to_string(binning.phase_bins) + " bins (need 10)");
    }
    if (!(hi > lo)) throw InsufficientCoverageError("quadrature values have zero spread");
}

MatrixC normalize(const MatrixC& m) {
    MatrixC h = 0.5 * (m + m.adjoint());
    return h / h.trace().real();
}

}  // namespace

void ReconstructionOptions::validate() const {
    if (dim < 2 || dim > max_fock_cutoff) throw InvalidParameterError("reconstruction cutoff must lie in [2, 25]");
    if (max_iters < 1) throw InvalidParameterError("max_iters must be positive");
    if (!(loglik_rel_tol > 0.0)) throw InvalidParameterError("loglik_rel_tol must be positive");
    if (binning.bins < 2 || !(binning.range_abs > 0.0) || binning.range_abs > max_quadrature_abs ||
        binning.phase_bins < 10) {
        throw InvalidParameterError("invalid x binning");
    }
    if (initial && initial->dim() != dim) throw DimensionMismatchError("initial state cutoff differs from dim");
}

MatrixC povm_element(double theta, double x_abs, int dim) {
    if (dim < 1) throw InvalidParameterError("povm_element: dim must be positive");
    const double xs[1] = {x_abs};
    check_grid(xs, "povm_element");
    const VectorR psi = oscillator_wavefunctions(x_abs, dim);
    VectorC v(dim);
    for (int m = 0; m < dim; ++m) v(m) = psi(m) * std::polar(1.0, m * theta);
    return v * v.adjoint();
}

ReconstructionResult mle_reconstruct(std::span<const QuadratureRecord> records, const ReconstructionOptions& opts) {
    opts.validate();
    check_coverage(records, opts.binning);
    const Engine engine(records, opts);
    const int dim = opts.dim;
    const double n = engine.total();

    MatrixC rho = opts.initial ? opts.initial->matrix() : DensityMatrix::maximally_mixed(dim).matrix();
    MatrixC r;
    double l = engine.evaluate(rho, &r);

    ReconstructionResult out{DensityMatrix(dim), {l}, 0, false};
    const MatrixC id = MatrixC::Identity(dim, dim);
    for (int it = 0; it < opts.max_iters; ++it) {
        const MatrixC rn = r / n;
        MatrixC cand = normalize(rn * rho * rn);
        MatrixC r_cand;
        double l_cand = engine.evaluate(cand, &r_cand);
        const double floor = l - 1e-10 * std::abs(l);
        if (l_cand < floor) {
            // Diluted step (I + eps R)/(1 + eps) guarantees ascent for small eps.
            bool improved = false;
            for (double eps = 0.5; eps > 1e-12; eps *= 0.5) {
                const MatrixC m = (id + eps * rn) / (1.0 + eps);
                cand = normalize(m * rho * m);
                l_cand = engine.evaluate(cand, &r_cand);
                if (l_cand >= floor) {
                    improved = true;
                    break;
                }
            }
            if (!improved) {
                out.converged = true;
                break;
            }
        }
        const double rel = std::abs(l_cand - l) / std::abs(l);
        rho = std::move(cand);
        r = std::move(r_cand);
        l = l_cand;
        out.loglik_trace.push_back(l);
        out.iterations = it + 1;
        if (rel < opts.loglik_rel_tol) {
            out.converged = true;
            break;
        }
    }
    out.rho = DensityMatrix::normalized(rho);
    return out;
}

double log_likelihood(const DensityMatrix& rho, std::span<const QuadratureRecord> records) {
    ReconstructionOptions opts;
    opts.dim = rho.dim();
    opts.binned = false;
    const Engine engine(records, opts);
    return engine.evaluate(rho.matrix(), nullptr);
}

std::vector<VarianceBin> binned_variance(std::span<const QuadratureRecord> records, int n_bins) {
    if (n_bins < 1) throw InvalidParameterError("need at least one bin");
    if (records.size() < static_cast<std::size_t>(100 * n_bins)) {
        throw InsufficientSamplesError("binned variance needs at least 100 records per bin");
    }
    std::vector<QuadratureRecord> sorted(records.begin(), records.end());
    for (auto& r : sorted) {
        const Sample s = canonical(r);
        r = {s.theta, s.x * std::numbers::sqrt2};
    }
    std::stable_sort(sorted.begin(), sorted.end(), [](const auto& a, const auto& b) { return a.phase < b.phase; });

    std::vector<VarianceBin> out;
    const std::size_t base = sorted.size() / n_bins, extra = sorted.size() % n_bins;
    std::size_t begin = 0;
    for (int b = 0; b < n_bins; ++b) {
        const std::size_t count = base + (static_cast<std::size_t>(b) < extra ? 1 : 0);
        double mean = 0.0, m2 = 0.0, phase = 0.0;
        for (std::size_t k = 0; k < count; ++k) {
            const auto& r = sorted[begin + k];
            const double d = r.value - mean;
            mean += d / (k + 1);
            m2 += d * (r.value - mean);
            phase += r.phase;
        }
        const double var = m2 / (count - 1);
        out.push_back({phase / count, var, 10.0 * std::log10(var),
                       10.0 / std::numbers::ln10 * std::sqrt(2.0 / count), count});
        begin += count;
    }
    return out;
}

SqueezingSummary squeezing_summary(const DensityMatrix& rho) {
    const auto e = min_max_variance(rho);
    return {-10.0 * std::log10(e.vmin), 10.0 * std::log10(e.vmax), e.theta_min};
}

BootstrapResult bootstrap_uncertainty(std::span<const QuadratureRecord> records, const ReconstructionOptions& opts,
                                      int resamples, std::uint64_t seed, const std::optional<DensityMatrix>& reference) {
    if (resamples < 2) throw InvalidParameterError("bootstrap needs at least 2 resamples");
    check_coverage(records, opts.binning);
    ReconstructionOptions local = opts;
    if (reference) local.initial = *reference;

    std::vector<SqueezingSummary> results(resamples);
    parallel_blocks(resamples, 1, worker_count(), [&](std::int64_t b, std::int64_t, std::int64_t) {
        std::mt19937_64 gen(stream_key(seed, 0xb007ULL, static_cast<std::uint64_t>(b)));
        std::uniform_int_distribution<std::size_t> pick(0, records.size() - 1);
        std::vector<QuadratureRecord> sample(records.size());
        for (auto& s : sample) s = records[pick(gen)];
        results[b] = squeezing_summary(mle_reconstruct(sample, local).rho);
    });

    auto stddev = [&](auto field) {
        double mean = 0.0;
        for (const auto& r : results) mean += field(r);
        mean /= resamples;
        double ss = 0.0;
        for (const auto& r : results) ss += (field(r) - mean) * (field(r) - mean);
        return std::sqrt(ss / (resamples - 1));
    };
    BootstrapResult out;
    out.squeezing_std_db = stddev([](const SqueezingSummary& s) { return s.squeezing_db; });
    out.antisqueezing_std_db = stddev([](const SqueezingSummary& s) { return s.antisqueezing_db; });
    out.uncertainty_db = std::max(out.squeezing_std_db, out.antisqueezing_std_db);
    out.resamples = resamples;
    return out;
}

double extract_phase(const DensityMatrix& rho, double min_contrast_snl) {
    const auto e = min_max_variance(rho);
    if (e.degenerate || e.vmax - e.vmin < min_contrast_snl) {
        throw DegeneratePhaseError("variance contrast " + std::to_string(e.vmax - e.vmin) +
                                   " SNL is too small to define a phase");
    }
    return e.theta_min;
}

UnwrapResult unwrap_to_line(std::span<const PhasePoint> points, SweepMode mode, double fixed, double intercept0) {
    (void)mode;  // both sweeps share phi = 2 pi Delta tau; `fixed` carries the other factor
    const std::size_t n = points.size();
    if (n < 3) throw FitError("phase unwrap needs at least 3 points, got " + std::to_string(n));
    bool increasing = true, decreasing = true;
    for (std::size_t j = 1; j < n; ++j) {
        increasing = increasing && points[j].control > points[j - 1].control;
        decreasing = decreasing && points[j].control < points[j - 1].control;
    }
    if (!increasing && !decreasing) throw FitError("control values must be strictly monotone");

    UnwrapResult out;
    out.expected_slope = 2.0 * pi * fixed;
    out.points.assign(points.begin(), points.end());
    for (auto& p : out.points) {
        p.phase_mod_pi = wrap_mod_pi(p.phase_mod_pi);
        const double model = intercept0 + out.expected_slope * p.control;
        out.model.push_back(model);
        const double k = std::round((model - p.phase_mod_pi) / pi);
        p.unwrapped = p.phase_mod_pi + k * pi;
    }

    double sx = 0.0, sy = 0.0;
    for (const auto& p : out.points) {
        sx += p.control;
        sy += p.unwrapped;
    }
    const double mx = sx / n, my = sy / n;
    double sxx = 0.0, sxy = 0.0;
    for (const auto& p : out.points) {
        sxx += (p.control - mx) * (p.control - mx);
        sxy += (p.control - mx) * (p.unwrapped - my);
    }
    out.slope = sxy / sxx;
    out.intercept = my - out.slope * mx;

    double max_res = 0.0, max_step = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
        out.residuals.push_back(out.points[j].unwrapped - (out.intercept + out.slope * out.points[j].control));
        max_res = std::max(max_res, std::abs(out.residuals.back()));
        if (j > 0) max_step = std::max(max_step, std::abs(out.model[j] - out.model[j - 1]));
    }
    out.ambiguous = max_step > pi / 2.0 && max_res > pi / 4.0;
    return out;
}

}  // namespace sqzmem
