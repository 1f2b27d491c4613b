#include "drtz/mgre.hpp"

#include "drtz/dft.hpp"

#include <sstream>

namespace drtz {

void SequenceParams::validate() const {
    require(nx > 0 && ny > 0, "sequence: matrix size must be positive");
    require(ny % 2 == 0, "sequence: number of phase-encode lines must be even");
    require(!te_ms.empty(), "sequence: at least one echo time required");
    for (std::size_t e = 0; e < te_ms.size(); ++e) {
        require(te_ms[e] > 0.0, "sequence: echo times must be positive");
        if (e > 0) require(te_ms[e] > te_ms[e - 1], "sequence: echo times must be strictly increasing");
    }
    require(tr_ms > te_ms.back(), "sequence: TR must exceed the last echo time");
}

double phase_encode_time(int line, int ny, double tr_ms) {
    if (line < 0 || line >= ny) {
        std::ostringstream os;
        os << "phase-encode line " << line << " outside [0, " << ny << ")";
        throw InvalidArgument(os.str());
    }
    return line * tr_ms * 1e-3;
}

void CorrectionSchedule::validate(int ny) const {
    require(static_corr_hz.size() == ny && riro_corr_value_hz.size() == ny,
            "correction schedule: length must equal the number of phase-encode lines");
    require(static_corr_hz.allFinite() && riro_corr_value_hz.allFinite(),
            "correction schedule: non-finite values");
}

namespace {

void check_inputs(const ScalarField2D& rho, const FieldModel& model, const SequenceParams& seq,
                  const std::optional<CorrectionSchedule>& corr) {
    seq.validate();
    model.validate();
    require(rho.rows() == seq.ny && rho.cols() == seq.nx, "acquisition: density shape does not match sequence");
    require(same_shape(rho, model.riro_max_hz), "acquisition: density and field model differ in shape");
    require(rho.all_finite(), "acquisition: non-finite density");
    if (corr) corr->validate(seq.ny);
}

} // namespace

std::vector<KSpaceFrame> acquire_kspace(const ScalarField2D& rho, const FieldModel& model,
                                        const SequenceParams& seq,
                                        const std::optional<CorrectionSchedule>& corr) {
    check_inputs(rho, model, seq, corr);

    const double omega = model.omega();
    const auto roots = unit_roots<double>(seq.ny);
    const Eigen::ArrayXXd rho_a = rho.values.array();
    const Eigen::ArrayXXd static_a = model.static_hz.values.array();
    const Eigen::ArrayXXd riro_a = model.riro_max_hz.values.array();

    std::vector<KSpaceFrame> frames;
    frames.reserve(seq.te_ms.size());
    for (int e = 0; e < seq.echoes(); ++e) {
        const double te = seq.te_ms[e] * 1e-3;
        KSpaceFrame frame{e, MatrixXcd(seq.ny, seq.nx)};
        for (int j = 0; j < seq.ny; ++j) {
            const double t = phase_encode_time(j, seq.ny, seq.tr_ms);
            const double resp = std::sin(omega * (t + te));
            const double corr_hz = corr ? corr->total_hz(j) : 0.0;
            const Eigen::ArrayXXd phi = kTwoPi * te * (static_a + riro_a * resp - corr_hz);
            MatrixXcd encoded(seq.ny, seq.nx);
            encoded.real() = (rho_a * phi.cos()).matrix();
            encoded.imag() = (-rho_a * phi.sin()).matrix();
            frame.data.row(j) = fft2_row(encoded, j, roots).transpose();
        }
        frames.push_back(std::move(frame));
    }
    return frames;
}

std::vector<KSpaceFrame> acquire_kspace_oracle(const ScalarField2D& rho, const FieldModel& model,
                                               const SequenceParams& seq,
                                               const std::optional<CorrectionSchedule>& corr) {
    check_inputs(rho, model, seq, corr);

    const double w = kTwoPi / model.resp_period_s;
    std::vector<KSpaceFrame> frames;
    for (int e = 0; e < seq.echoes(); ++e) {
        const double te = seq.te_ms[e] / 1000.0;
        KSpaceFrame frame{e, MatrixXcd::Zero(seq.ny, seq.nx)};
        for (int ky = 0; ky < seq.ny; ++ky) {
            const double t_prime = ky * seq.tr_ms / 1000.0;
            const double c_hz = corr ? corr->static_corr_hz(ky) + corr->riro_corr_value_hz(ky) : 0.0;
            for (int kx = 0; kx < seq.nx; ++kx) {
                std::complex<double> acc = 0.0;
                for (int y = 0; y < seq.ny; ++y)
                    for (int x = 0; x < seq.nx; ++x) {
                        const double offset = model.static_hz(y, x) +
                                              model.riro_max_hz(y, x) * std::sin(w * (t_prime + te)) - c_hz;
                        const double arg = kTwoPi * (double(kx) * x / seq.nx + double(ky) * y / seq.ny) +
                                           kTwoPi * offset * te;
                        acc += rho(y, x) * std::complex<double>(std::cos(arg), -std::sin(arg));
                    }
                frame.data(ky, kx) = acc;
            }
        }
        frames.push_back(std::move(frame));
    }
    return frames;
}

ComplexImage2D reconstruct(const KSpaceFrame& frame, Spacing spacing) {
    require(frame.data.allFinite(), "reconstruct: non-finite k-space");
    return {ifft2(frame.data), spacing};
}

} // namespace drtz
