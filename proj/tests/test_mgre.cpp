#include "drtz/dft.hpp"
#include "drtz/fields.hpp"
#include "drtz/metrics.hpp"
#include "drtz/mgre.hpp"

#include <doctest.h>

#include <random>

using namespace drtz;

namespace {

double max_rel_diff(const std::vector<KSpaceFrame>& a, const std::vector<KSpaceFrame>& b) {
    double num = 0.0, den = 0.0;
    for (std::size_t e = 0; e < a.size(); ++e) {
        num = std::max(num, (a[e].data - b[e].data).cwiseAbs().maxCoeff());
        den = std::max(den, b[e].data.cwiseAbs().maxCoeff());
    }
    return num / den;
}

struct RandomCase {
    ScalarField2D rho;
    FieldModel model;
    SequenceParams seq;
    CorrectionSchedule corr;
};

RandomCase random_case(int nx, int ny, unsigned seed) {
    std::mt19937 rng(seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    RandomCase c;
    c.rho = ScalarField2D(ny, nx, {});
    for (int r = 0; r < ny; ++r)
        for (int x = 0; x < nx; ++x) c.rho(r, x) = u(rng);
    // Smooth RIRO: low-order polynomial with random coefficients.
    const double a = 8 + 4 * u(rng), b = 2 * u(rng), d = 2 * u(rng);
    ScalarField2D riro(ny, nx, {});
    ScalarField2D stat(ny, nx, {});
    for (int r = 0; r < ny; ++r)
        for (int x = 0; x < nx; ++x) {
            const double yy = double(r) / ny - 0.5, xx = double(x) / nx - 0.5;
            riro(r, x) = a + b * xx + d * yy * yy;
            stat(r, x) = 5.0 * u(rng);
        }
    c.model = {stat, riro, 3.0};
    c.seq = {nx, ny, 1000.0, {5.0, 15.0, 25.0}};
    c.corr = CorrectionSchedule::zeros(ny);
    for (int j = 0; j < ny; ++j) {
        c.corr.static_corr_hz(j) = 2.5;
        c.corr.riro_corr_value_hz(j) = a * std::sin(kTwoPi * j / 3.0);
    }
    return c;
}

} // namespace

TEST_CASE("phase_encode_time") {
    CHECK(phase_encode_time(0, 56, 1000.0) == 0.0);
    CHECK(phase_encode_time(28, 56, 1000.0) == doctest::Approx(28.0));
    CHECK(phase_encode_time(55, 56, 1000.0) == doctest::Approx(55.0));
    CHECK_THROWS_AS(phase_encode_time(56, 56, 1000.0), InvalidArgument);
    CHECK_THROWS_AS(phase_encode_time(-1, 56, 1000.0), InvalidArgument);
}

TEST_CASE("sequence validation") {
    CHECK_THROWS_AS((SequenceParams{16, 15, 1000, {15}}.validate()), InvalidArgument);
    CHECK_THROWS_AS((SequenceParams{16, 16, 1000, {15, 10}}.validate()), InvalidArgument);
    CHECK_THROWS_AS((SequenceParams{16, 16, 10, {15}}.validate()), InvalidArgument);
    CHECK_THROWS_AS((SequenceParams{16, 16, 1000, {}}.validate()), InvalidArgument);
    CHECK_NOTHROW((SequenceParams{16, 16, 1000, {2.5, 5.5}}.validate()));
}

TEST_CASE("fft2 pair: round trip and single-row extraction") {
    std::mt19937 rng(11);
    std::normal_distribution<double> n(0.0, 1.0);
    MatrixXcd x(12, 10);
    for (Eigen::Index i = 0; i < x.size(); ++i) x(i) = {n(rng), n(rng)};
    const MatrixXcd k = fft2(x);
    CHECK((ifft2(k) - x).cwiseAbs().maxCoeff() < 1e-12);
    // DC term is the plain sum.
    CHECK(std::abs(k(0, 0) - x.sum()) < 1e-12);
    const auto roots = unit_roots<double>(12);
    for (Eigen::Index j = 0; j < 12; ++j)
        CHECK((fft2_row(x, j, roots).transpose() - k.row(j)).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("oracle equivalence on random 16x16 inputs") {
    for (unsigned seed : {1u, 2u, 3u}) {
        const auto c = random_case(16, 16, seed);
        CHECK(max_rel_diff(acquire_kspace(c.rho, c.model, c.seq), acquire_kspace_oracle(c.rho, c.model, c.seq)) < 1e-9);
        CHECK(max_rel_diff(acquire_kspace(c.rho, c.model, c.seq, c.corr),
                           acquire_kspace_oracle(c.rho, c.model, c.seq, c.corr)) < 1e-9);
    }
}

TEST_CASE("oracle equivalence on a non-square grid") {
    const auto c = random_case(12, 20, 9);
    CHECK(max_rel_diff(acquire_kspace(c.rho, c.model, c.seq, c.corr),
                       acquire_kspace_oracle(c.rho, c.model, c.seq, c.corr)) < 1e-9);
}

TEST_CASE("zero density gives zero k-space") {
    auto c = random_case(8, 8, 4);
    c.rho.values.setZero();
    for (const auto& f : acquire_kspace_oracle(c.rho, c.model, c.seq)) CHECK(f.data.isZero(0.0));
    for (const auto& f : acquire_kspace(c.rho, c.model, c.seq)) CHECK(f.data.isZero(0.0));
}

TEST_CASE("zero offsets: reconstruction returns the density and conserves energy") {
    const auto ph = make_cylinder_phantom(32, 24, 2.0, 10.0, 1.0);
    ScalarField2D rho = ph.density;
    rho.values.array() += 0.25; // non-trivial background
    const FieldModel model{ScalarField2D(24, 32, {}), ScalarField2D(24, 32, {}), 3.0};
    const SequenceParams seq{32, 24, 1000.0, {15.0}};
    const auto frames = acquire_kspace(rho, model, seq);
    const auto img = reconstruct(frames[0]);
    const double max_rel = (img.data.cwiseAbs() - rho.values).cwiseAbs().maxCoeff() / rho.values.maxCoeff();
    CHECK(max_rel < 1e-10);
    CHECK(img.data.cwiseAbs2().sum() == doctest::Approx(rho.values.squaredNorm()).epsilon(1e-9));
}

TEST_CASE("reconstruct: zero and delta k-space") {
    KSpaceFrame zero{0, MatrixXcd::Zero(8, 6)};
    CHECK(reconstruct(zero).data.isZero(0.0));
    KSpaceFrame delta{0, MatrixXcd::Zero(8, 6)};
    delta.data(0, 0) = 1.0;
    CHECK((reconstruct(delta).data.array() - std::complex<double>(1.0 / 48.0)).abs().maxCoeff() < 1e-15);
}

TEST_CASE("uniform RIRO cancels exactly when TE is a full respiratory period") {
    // w TE = 2 pi, so sin(w (t' + TE)) = sin(w t') and the correction matches line by line.
    const int n = 16;
    const auto ph = make_cylinder_phantom(n, n, 2.0, 6.0, 1.0);
    const double c = 12.0, period = 3.0;
    const FieldModel moving{ScalarField2D(n, n, {}), ScalarField2D(n, n, {}, c), period};
    const FieldModel still{ScalarField2D(n, n, {}), ScalarField2D(n, n, {}), period};
    const SequenceParams seq{n, n, 3500.0, {3000.0}};
    CorrectionSchedule corr = CorrectionSchedule::zeros(n);
    for (int j = 0; j < n; ++j) corr.riro_corr_value_hz(j) = c * std::sin(kTwoPi / period * phase_encode_time(j, n, seq.tr_ms));

    const auto ref = reconstruct(acquire_kspace(ph.density, still, seq)[0]);
    const auto fixed = reconstruct(acquire_kspace(ph.density, moving, seq, corr)[0]);
    const auto ghosted = reconstruct(acquire_kspace(ph.density, moving, seq)[0]);
    CHECK(relative_residual_energy(fixed.data, ref.data) < 1e-10);
    CHECK(relative_residual_energy(ghosted.data, ref.data) > 1e-3);
}

TEST_CASE("uniform static offset is a global phase that a matching static correction removes") {
    const auto ph = make_cylinder_phantom(24, 24, 2.0, 10.0, 1.0);
    const auto riro = make_radial_riro(ph.object, Spacing::isotropic(2.0), 12.0, 1.0);
    const SequenceParams seq{24, 24, 1000.0, {15.0, 30.0}};
    const FieldModel base{ScalarField2D(24, 24, {}), riro, 3.0};
    const FieldModel shifted{ScalarField2D(24, 24, {}, 37.0), riro, 3.0};
    CorrectionSchedule corr = CorrectionSchedule::zeros(24);
    corr.static_corr_hz.setConstant(37.0);

    const auto a = acquire_kspace(ph.density, base, seq);
    const auto b = acquire_kspace(ph.density, shifted, seq, corr);
    const auto c = acquire_kspace(ph.density, shifted, seq);
    for (std::size_t e = 0; e < a.size(); ++e) {
        const auto ma = reconstruct(a[e]).data.cwiseAbs();
        CHECK((reconstruct(b[e]).data.cwiseAbs() - ma).cwiseAbs().maxCoeff() < 1e-10);
        // Uncorrected static shift only rotates the phase.
        CHECK((reconstruct(c[e]).data.cwiseAbs() - ma).cwiseAbs().maxCoeff() < 1e-10);
    }
}

TEST_CASE("ghost energy outside the object is positive for non-uniform RIRO") {
    const auto ph = make_cylinder_phantom(128, 56, 2.2, 10.0, 1.0);
    const auto riro = make_radial_riro(ph.object, Spacing::isotropic(2.2), 12.0, 0.5);
    const FieldModel model{ScalarField2D(56, 128, {}), riro, 3.0};
    const SequenceParams seq{128, 56, 1000.0, {15.0}};
    const auto img = reconstruct(acquire_kspace(ph.density, model, seq)[0]);
    const Mask2D outside = !dilate(ph.object, 2);
    CHECK(energy(img.data, outside) > 1e-6 * energy(img.data, ph.object));
}

TEST_CASE("acquisition input validation") {
    const auto c = random_case(8, 8, 5);
    CorrectionSchedule short_corr = CorrectionSchedule::zeros(6);
    CHECK_THROWS_AS(acquire_kspace(c.rho, c.model, c.seq, short_corr), InvalidArgument);
    ScalarField2D bad = c.rho;
    bad(1, 1) = std::numeric_limits<double>::quiet_NaN();
    CHECK_THROWS_AS(acquire_kspace(bad, c.model, c.seq), InvalidArgument);
    FieldModel wrong = c.model;
    wrong.riro_max_hz = ScalarField2D(8, 6, {});
    CHECK_THROWS_AS(acquire_kspace(c.rho, wrong, c.seq), InvalidArgument);
}
