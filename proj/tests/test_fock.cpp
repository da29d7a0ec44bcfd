#include <doctest.h>

#include <cmath>
#include <numeric>
#include <vector>

#include "sqzmem/entanglement.hpp"
#include "sqzmem/errors.hpp"
#include "sqzmem/gaussian.hpp"
#include "sqzmem/oscillator.hpp"
#include "sqzmem/quadrature.hpp"
#include "sqzmem/states.hpp"
#include "test_helpers.hpp"

using namespace sqzmem;
using namespace sqzmem::testing;

namespace {

std::vector<double> uniform_grid(double lo, double hi, double step) {
    std::vector<double> g;
    const int n = static_cast<int>(std::round((hi - lo) / step));
    for (int i = 0; i <= n; ++i) g.push_back(lo + i * step);
    return g;
}

double trapezoid(const std::vector<double>& f, double step) {
    double s = 0.5 * (f.front() + f.back());
    for (std::size_t i = 1; i + 1 < f.size(); ++i) s += f[i];
    return s * step;
}

}  // namespace

TEST_CASE("oscillator eigenfunctions are orthonormal up to n = 40") {
    // Brute-force overlap integrals on a fine grid.
    const int count = 41;
    const double step = 0.01;
    const auto grid = uniform_grid(-12.0, 12.0, step);
    MatrixR gram = MatrixR::Zero(count, count);
    for (double x : grid) {
        const VectorR psi = oscillator_wavefunctions(x, count);
        gram += step * psi * psi.transpose();
    }
    CHECK((gram - MatrixR::Identity(count, count)).cwiseAbs().maxCoeff() < 1e-10);
    CHECK(oscillator_wavefunctions(0.0, 2)(1) == doctest::Approx(0.0));
}

TEST_CASE("laguerre matches explicit low-order forms") {
    const double x = 1.7;
    CHECK(laguerre(1, 2, x) == doctest::Approx(3.0 - x));
    CHECK(laguerre(2, 0, x) == doctest::Approx(0.5 * (x * x - 4 * x + 2)));
    CHECK(laguerre(2, 1, x) == doctest::Approx(0.5 * (x * x - 6 * x + 6)));
}

TEST_CASE("fit_squeezed_thermal inverts the variance formulas") {
    SUBCASE("input-fit values") {
        const auto p = fit_squeezed_thermal(0.65, 3.45, 0.0);
        CHECK(p.r == doctest::Approx(0.41729).epsilon(1e-4));
        CHECK(p.nbar == doctest::Approx(0.24875).epsilon(1e-4));
    }
    SUBCASE("retrieved-fit values") {
        const auto p = fit_squeezed_thermal(0.95, 1.36, 0.0);
        CHECK(p.r == doctest::Approx(0.08970).epsilon(1e-3));
        CHECK(p.nbar == doctest::Approx(0.06833).epsilon(1e-3));
    }
    SUBCASE("vacuum") {
        const auto p = fit_squeezed_thermal(1.0, 1.0, 0.0);
        CHECK(p.r == 0.0);
        CHECK(p.nbar == 0.0);
    }
    SUBCASE("unphysical product rejected") {
        CHECK_THROWS_AS(fit_squeezed_thermal(0.5, 1.5, 0.0), UnphysicalStateError);
    }
    SUBCASE("round trip through the Fock state") {
        const auto p = fit_squeezed_thermal(0.65, 3.45, 0.7);
        const auto e = min_max_variance(make_squeezed_thermal(p, 20));
        CHECK(e.vmin == doctest::Approx(0.65).epsilon(1e-4));
        CHECK(e.vmax == doctest::Approx(3.45).epsilon(1e-4));
        CHECK(e.theta_min == doctest::Approx(0.7).epsilon(1e-6));
    }
}

TEST_CASE("make_squeezed_thermal") {
    SUBCASE("identity parameters give vacuum") {
        const auto rho = make_squeezed_thermal({0.0, 0.0, 0.0}, 10);
        CHECK((rho.matrix() - DensityMatrix(10).matrix()).cwiseAbs().maxCoeff() < 1e-12);
    }
    SUBCASE("input-fit variances") {
        const auto rho = make_squeezed_thermal({0.41729, 0.24875, 0.0}, 20);
        check_state_invariants(rho);
        CHECK(rho.truncation_tail() < 1e-4);
        const auto e = min_max_variance(rho);
        CHECK(e.vmin == doctest::Approx(0.65).epsilon(1e-3));
        CHECK(e.vmax == doctest::Approx(3.45).epsilon(1e-3));
    }
    SUBCASE("thermal state is geometric") {
        const auto rho = make_squeezed_thermal({0.0, 1.0, 0.0}, 20);
        for (int n = 0; n < 10; ++n) CHECK(rho(n, n).real() == doctest::Approx(0.5 * std::pow(0.5, n)).epsilon(1e-5));
        CHECK(std::abs(rho(0, 1)) < 1e-14);
    }
    SUBCASE("errors") {
        CHECK_THROWS_AS(make_squeezed_thermal({-0.1, 0.0, 0.0}, 20), InvalidParameterError);
        CHECK_THROWS_AS(make_squeezed_thermal({0.0, -0.1, 0.0}, 20), InvalidParameterError);
        CHECK_THROWS_AS(make_squeezed_thermal({1.2, 0.5, 0.0}, 20), CutoffTooSmallError);
    }
}

TEST_CASE("quad_variance") {
    const DensityMatrix vac(20);
    for (double th : {0.0, 0.4, 2.0}) CHECK(quad_variance(vac, th) == doctest::Approx(1.0));
    const auto in = make_squeezed_thermal(input_fit_params(), 20);
    CHECK(quad_variance(in, 0.0) == doctest::Approx(0.65).epsilon(1e-4));
    CHECK(quad_variance(in, pi / 2) == doctest::Approx(3.45).epsilon(1e-4));
}

TEST_CASE("min_max_variance") {
    SUBCASE("vacuum is degenerate") {
        const auto e = min_max_variance(DensityMatrix(12));
        CHECK(e.degenerate);
        CHECK(e.theta_min == 0.0);
        CHECK(e.vmin == doctest::Approx(1.0));
        CHECK(e.vmax == doctest::Approx(1.0));
    }
    SUBCASE("retrieved-fit state") {
        const auto e = min_max_variance(make_squeezed_thermal(retrieved_fit_params(0.25), 20));
        CHECK(e.vmin == doctest::Approx(0.95).epsilon(1e-6));
        CHECK(e.vmax == doctest::Approx(1.36).epsilon(1e-6));
        CHECK(e.theta_min == doctest::Approx(0.25).epsilon(1e-9));
    }
    SUBCASE("construction round trip") {
        const auto e = min_max_variance(make_squeezed_thermal({0.3, 0.1, 1.0}, 20));
        CHECK(e.theta_min == doctest::Approx(1.0).epsilon(1e-9));
    }
}

TEST_CASE("quadrature_pdf") {
    const auto grid = uniform_grid(-8.0, 8.0, 0.02);
    SUBCASE("vacuum at the origin") {
        const double x0[] = {0.0};
        CHECK(quadrature_pdf(DensityMatrix(10), 1.3, x0)[0] == doctest::Approx(1.0 / std::sqrt(pi)));
    }
    SUBCASE("single photon has a node at the origin") {
        const double x0[] = {0.0};
        CHECK(std::abs(quadrature_pdf(DensityMatrix::fock(1, 10), 0.4, x0)[0]) < 1e-15);
    }
    SUBCASE("input-fit state matches the Gaussian oracle") {
        // Truncating the coherences at the cutoff leaves ~4e-6 pointwise (6e-5 at cutoff 20).
        const auto params = input_fit_params(0.3);
        const auto rho = make_squeezed_thermal(params, 25);
        const auto oracle = GaussianStateOracle::squeezed_thermal(params);
        for (double th : {0.0, 0.3, 1.1, 2.5}) {
            const auto pdf = quadrature_pdf(rho, th, grid);
            double dev = 0.0;
            double minval = 1.0;
            for (std::size_t i = 0; i < grid.size(); ++i) {
                dev = std::max(dev, std::abs(pdf[i] - oracle.pdf(th, grid[i])));
                minval = std::min(minval, pdf[i]);
            }
            CHECK(dev < 5e-6);
            CHECK(minval >= -1e-10);
            CHECK(trapezoid(pdf, 0.02) == doctest::Approx(1.0).epsilon(1e-4));
        }
    }
    SUBCASE("out-of-range grid") {
        const double bad[] = {0.0, 8.5};
        CHECK_THROWS_AS(quadrature_pdf(DensityMatrix(5), 0.0, bad), GridOutOfRangeError);
    }
}

TEST_CASE("wigner") {
    const double o[] = {0.0};
    CHECK(wigner(DensityMatrix(10), o, o)[0] == doctest::Approx(1.0 / pi));
    CHECK(wigner(DensityMatrix::fock(1, 10), o, o)[0] == doctest::Approx(-1.0 / pi));

    SUBCASE("Gaussian oracle pointwise") {
        const auto params = input_fit_params(0.8);
        const auto rho = make_squeezed_thermal(params, 25);
        const auto oracle = GaussianStateOracle::squeezed_thermal(params);
        double dev = 0.0;
        for (double x = -4.0; x <= 4.0; x += 0.37)
            for (double p = -4.0; p <= 4.0; p += 0.41) dev = std::max(dev, std::abs(wigner_at(rho, x, p) - oracle.wigner(x, p)));
        CHECK(dev < 2e-6);
    }
    SUBCASE("normalization on a step-0.05 grid") {
        const auto rho = make_squeezed_thermal(input_fit_params(0.4), 20);
        const auto g = uniform_grid(-7.0, 7.0, 0.05);
        const auto w = wigner(rho, g, g);
        const double total = std::accumulate(w.begin(), w.end(), 0.0) * 0.05 * 0.05;
        CHECK(total == doctest::Approx(1.0).epsilon(1e-3));
    }
    SUBCASE("marginals reproduce quadrature_pdf (Radon consistency)") {
        // A non-Gaussian state with complex coherences exercises every W_mn sign.
        MatrixC psi = MatrixC::Zero(12, 1);
        psi(0, 0) = 0.6;
        psi(1, 0) = cplx(0.3, 0.5);
        psi(3, 0) = cplx(-0.2, 0.4);
        psi /= psi.norm();
        const auto rho = DensityMatrix::normalized(psi * psi.adjoint());
        const double step = 0.02;
        const auto ys = uniform_grid(-5.5, 5.5, step);
        for (double th : {0.0, pi / 4, pi / 2}) {
            double dev = 0.0;
            for (double xq = -2.5; xq <= 2.5; xq += 0.25) {
                std::vector<double> line;
                for (double y : ys) {
                    line.push_back(wigner_at(rho, xq * std::cos(th) - y * std::sin(th), xq * std::sin(th) + y * std::cos(th)));
                }
                const double xs[] = {xq};
                dev = std::max(dev, std::abs(trapezoid(line, step) - quadrature_pdf(rho, th, xs)[0]));
            }
            CHECK(dev < 1e-4);
        }
    }
}

TEST_CASE("fidelity") {
    const auto in = make_squeezed_thermal(input_fit_params(), 20);
    const auto out = make_squeezed_thermal(retrieved_fit_params(), 20);
    CHECK(fidelity(in, in) == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(std::abs(fidelity(in, out) - fidelity(out, in)) < 1e-9);
    CHECK(fidelity(in, out) == doctest::Approx(0.89).epsilon(0.03 / 0.89));
    CHECK(fidelity(in, DensityMatrix(20)) == doctest::Approx(0.74).epsilon(0.03 / 0.74));

    const double oracle = gaussian_fidelity(GaussianStateOracle::squeezed_thermal(input_fit_params()),
                                            GaussianStateOracle::squeezed_thermal(retrieved_fit_params()));
    CHECK(std::abs(fidelity(in, out) - oracle) < 1e-5);
    CHECK_THROWS_AS(fidelity(in, DensityMatrix(10)), DimensionMismatchError);

    SUBCASE("coherent states overlap") {
        const auto a = coherent_state({0.5, 0.2}, 20);
        const auto b = coherent_state({-0.3, 0.6}, 20);
        const double expected = std::exp(-std::norm(cplx(0.5, 0.2) - cplx(-0.3, 0.6)));
        CHECK(fidelity(a, b) == doctest::Approx(expected).epsilon(1e-8));
        CHECK(gaussian_fidelity(GaussianStateOracle::coherent({0.5, 0.2}), GaussianStateOracle::coherent({-0.3, 0.6})) ==
              doctest::Approx(expected).epsilon(1e-12));
    }
}

TEST_CASE("displacement matrix is unitary where the cutoff is generous") {
    const MatrixC d = displacement_matrix({0.7, -0.4}, 40);
    const MatrixC block = (d.adjoint() * d).topLeftCorner(15, 15);
    CHECK((block - MatrixC::Identity(15, 15)).cwiseAbs().maxCoeff() < 1e-10);
    // D(alpha)|0> is the coherent state.
    const auto coh = coherent_state({0.7, -0.4}, 40);
    CHECK(std::abs(std::norm(d(2, 0)) - coh(2, 2).real()) < 1e-12);
}

TEST_CASE("add_vacuum_units") {
    const auto in = make_squeezed_thermal(input_fit_params(), 20);
    SUBCASE("zero units is the identity") {
        CHECK((add_vacuum_units(in, 0.0).matrix() - in.matrix()).cwiseAbs().maxCoeff() == 0.0);
    }
    SUBCASE("variances grow additively") {
        const auto in25 = make_squeezed_thermal(input_fit_params(), 25);
        const auto noisy = add_vacuum_units(in25, 2.0);
        check_state_invariants(noisy);
        const auto e = min_max_variance(noisy);
        CHECK(e.vmin == doctest::Approx(2.65).epsilon(1e-3));
        CHECK(e.vmax == doctest::Approx(5.45).epsilon(1e-3));
        const double f = fidelity(in25, noisy);
        CHECK(f == doctest::Approx(0.74).epsilon(0.03 / 0.74));
        const auto oracle = GaussianStateOracle::squeezed_thermal(input_fit_params());
        CHECK(std::abs(f - gaussian_fidelity(oracle, oracle.with_added_noise(2.0))) < 1e-4);
    }
    SUBCASE("cutoff too small at dim 20 for two units") {
        CHECK_THROWS_AS(add_vacuum_units(in, 2.0), CutoffTooSmallError);
    }
    SUBCASE("fidelity decreases with added noise") {
        double prev = 1.0 + 1e-12;
        const auto in25 = make_squeezed_thermal(input_fit_params(), 25);
        for (double u : {0.0, 1.0, 2.0}) {
            const double f = fidelity(in25, add_vacuum_units(in25, u));
            CHECK(f < prev);
            prev = f;
        }
        // Three units push the populations past any cutoff <= 25; the Gaussian path covers u = 3.
        CHECK_THROWS_AS(add_vacuum_units(in25, 3.0), CutoffTooSmallError);
        const auto oracle = GaussianStateOracle::squeezed_thermal(input_fit_params());
        double prev_oracle = 1.0 + 1e-12;
        for (double u : {0.0, 1.0, 2.0, 3.0}) {
            const double f = gaussian_fidelity(oracle, oracle.with_added_noise(u));
            CHECK(f < prev_oracle);
            prev_oracle = f;
        }
    }
}

TEST_CASE("split_on_beamsplitter") {
    SUBCASE("vacuum") {
        const auto two = split_on_beamsplitter(DensityMatrix(6));
        CHECK(std::abs(two.matrix()(0, 0) - 1.0) < 1e-12);
    }
    SUBCASE("single photon becomes (|10> + |01>)/sqrt(2)") {
        const int d = 6;
        const auto two = split_on_beamsplitter(DensityMatrix::fock(1, d));
        const int i10 = 1 * d + 0;
        const int i01 = 0 * d + 1;
        CHECK(two.matrix()(i10, i10).real() == doctest::Approx(0.5));
        CHECK(two.matrix()(i01, i01).real() == doctest::Approx(0.5));
        CHECK(two.matrix()(i10, i01).real() == doctest::Approx(0.5));
    }
    SUBCASE("energy is conserved") {
        const auto rho = make_squeezed_thermal(input_fit_params(0.6), 20);
        const auto two = split_on_beamsplitter(rho);
        CHECK(std::abs(two.matrix().trace().real() - 1.0) < 1e-9);
        const double e = two.reduced_a().mean_photon_number() + two.reduced_b().mean_photon_number();
        CHECK(e == doctest::Approx(rho.mean_photon_number()).epsilon(1e-9));
    }
}

TEST_CASE("log negativity and entanglement potential") {
    CHECK(entanglement_potential(DensityMatrix(10), LogBase::two) < 1e-9);
    CHECK(entanglement_potential(coherent_state({0.8, 0.3}, 20), LogBase::two) < 1e-9);

    SUBCASE("split squeezed vacuum: E_N = r in base e") {
        const double r = 0.41729;
        const auto rho = make_squeezed_thermal({r, 0.0, 0.0}, 20);
        CHECK(entanglement_potential(rho, LogBase::e) == doctest::Approx(r).epsilon(1e-4));
        CHECK(entanglement_potential(rho, LogBase::two) == doctest::Approx(r / std::log(2.0)).epsilon(1e-4));
    }
    SUBCASE("Gaussian oracle agreement for squeezed thermal inputs") {
        for (auto params : {input_fit_params(0.2), retrieved_fit_params(1.0)}) {
            const auto rho = make_squeezed_thermal(params, 25);
            const double oracle = GaussianStateOracle::squeezed_thermal(params).split_log_negativity(LogBase::two);
            CHECK(entanglement_potential(rho, LogBase::two) == doctest::Approx(oracle).epsilon(1e-4));
        }
    }
    SUBCASE("invariant under local rotations") {
        const auto two = split_on_beamsplitter(make_squeezed_thermal(retrieved_fit_params(0.4), 12));
        const double base = log_negativity(two, LogBase::e);
        CHECK(std::abs(log_negativity(two.locally_rotated(0.7, -1.9), LogBase::e) - base) < 1e-9);
    }
}

TEST_CASE("properties over random squeezed thermal states") {
    PropertyRng rng(20240611);
    for (int trial = 0; trial < 20; ++trial) {
        // Domain where the cutoff-20 truncation floor stays below 1e-5.
        const SqueezedThermalParams params{rng.uniform(0.0, 0.3), rng.uniform(0.0, 0.2), rng.uniform(0.0, pi)};
        const auto rho = make_squeezed_thermal(params, 20);
        check_state_invariants(rho);
        const auto oracle = GaussianStateOracle::squeezed_thermal(params);

        const auto e = min_max_variance(rho);
        CHECK(e.vmin * e.vmax >= 1.0 - 1e-6);
        CHECK(std::abs(e.vmin - oracle.min_variance_snl()) < 1e-5);
        CHECK(std::abs(e.vmax - oracle.max_variance_snl()) < 1e-5);

        const double theta = rng.uniform(0.0, pi);
        CHECK(std::abs(quad_variance(rho, theta) - oracle.variance_snl(theta)) < 1e-5);
        const double delta = rng.uniform(-2.0, 2.0);
        CHECK(std::abs(quad_variance(rho, theta) - quad_variance(rho.rotated(delta), theta + delta)) < 1e-9);

        const double x = rng.uniform(-2.0, 2.0);
        const double p = rng.uniform(-2.0, 2.0);
        CHECK(std::abs(wigner_at(rho, x, p) - oracle.wigner(x, p)) < 1e-5);

        const SqueezedThermalParams other{rng.uniform(0.0, 0.3), rng.uniform(0.0, 0.2), rng.uniform(0.0, pi)};
        CHECK(std::abs(fidelity(rho, make_squeezed_thermal(other, 20)) -
                       gaussian_fidelity(oracle, GaussianStateOracle::squeezed_thermal(other))) < 1e-5);

        const auto noisy = add_vacuum_units(rho, 0.5);
        check_state_invariants(noisy);
        const auto noisy_oracle = oracle.with_added_noise(0.5);
        CHECK(std::abs(quad_variance(noisy, theta) - noisy_oracle.variance_snl(theta)) < 1e-5);
    }
}

TEST_CASE("density matrix JSON round trip and validation") {
    const auto rho = make_squeezed_thermal(input_fit_params(1.2), 20);
    const auto back = density_matrix_from_json(to_json(rho));
    CHECK((back.matrix() - rho.matrix()).cwiseAbs().maxCoeff() == 0.0);
    CHECK_THROWS_AS(density_matrix_from_json(R"({"dim": 2, "re": [[1, 0], [0, 1]], "im": [[0, 0], [0, 0]]})"),
                    InvalidStateError);
    CHECK_THROWS_AS(density_matrix_from_json(R"({"dim": 2, "re": [[0.5, 0], [0, 0.5]], "im": [[0, 0.1], [0.1, 0]]})"),
                    InvalidStateError);
    CHECK_THROWS_AS(density_matrix_from_json("not json"), InvalidStateError);
}
