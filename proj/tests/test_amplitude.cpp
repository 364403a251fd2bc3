#include "doctest.h"

#include <cmath>

#include "gtms/amplitude.hpp"
#include "gtms/mps.hpp"
#include "gtms/oracle.hpp"
#include "test_util.hpp"

using namespace gtms;
using gtms::testutil::rel_err;

namespace {

// Element-wise evaluation of one transfer-matrix entry straight from the
// defining angles, independent of the production code path.
Eigen::MatrixXcd naive_transfer(const NetworkShape& shape, const GtmsWeights& w, int j,
                                const SpinConfig& sigma, bool drop_hat = false) {
    const int n = shape.deep_per_block, m = shape.hidden_per_block;
    const int chi = 1 << n;
    Eigen::MatrixXcd T(chi, chi);
    for (int r = 0; r < chi; ++r)
        for (int col = 0; col < chi; ++col) {
            cplx ea = 0.0;
            for (int nu = 0; nu < n; ++nu)
                ea += w.a(j, nu) * static_cast<double>(deep_sign(r, nu));
            cplx entry = std::exp(ea);
            for (int mu = 0; mu < m; ++mu) {
                cplx phi = w.b(j, mu);
                for (int i = 0; i < shape.n_sites; ++i)
                    phi += static_cast<double>(sigma[i]) * w.w[j](i, mu);
                for (int nu = 0; nu < n; ++nu) {
                    phi += w.w_tilde[j](mu, nu) * static_cast<double>(deep_sign(r, nu));
                    if (!drop_hat)
                        phi += w.w_hat[j](mu, nu) * static_cast<double>(deep_sign(col, nu));
                }
                entry *= 2.0 * std::cosh(phi);
            }
            T(r, col) = entry;
        }
    return T;
}

NetworkShape small_shape(Boundary b = Boundary::Periodic) {
    return NetworkShape::make(3, 3, 1, 2, 2, b);
}

}  // namespace

TEST_SUITE("amplitude") {

TEST_CASE("zero weights give constant transfer entries (2 cosh 0)^m") {
    const NetworkShape shape = small_shape();
    const GtmsWeights w = GtmsWeights::zero(shape);
    const SpinConfig sigma{1, -1, 1};
    const Eigen::MatrixXcd T = transfer_matrix(shape, w, 0, sigma);
    for (int r = 0; r < 2; ++r)
        for (int c = 0; c < 2; ++c) CHECK(rel_err(T(r, c), cplx(4.0, 0.0)) < 1e-15);
}

TEST_CASE("the spin-1 valence-bond block reproduces its hand-computed entry") {
    // sigma = 0, both deep spins +1: cosh(-i pi/4) cosh(i pi) = -1/sqrt(2),
    // times the 2^m convention factor of 4
    const BlockWeights blk = aklt_weights();
    const NetworkShape shape = NetworkShape::make(1, 1, 1, 2, 3);
    GtmsWeights w = GtmsWeights::zero(shape);
    w.b.row(0) = blk.b.transpose();
    w.w[0].row(0) = blk.w.transpose();
    w.w_tilde[0] = blk.w_tilde;
    w.w_hat[0] = blk.w_hat;
    const Eigen::MatrixXcd T = transfer_matrix(shape, w, 0, SpinConfig{0});
    CHECK(rel_err(T(0, 0), cplx(-4.0 / std::sqrt(2.0), 0.0)) < 1e-14);
}

TEST_CASE("transfer matrices match the element-wise evaluation") {
    RngStream rng(21);
    for (int trial = 0; trial < 10; ++trial) {
        const NetworkShape shape =
            NetworkShape::make(2 + rng.uniform_int(3), 2 + rng.uniform_int(3),
                               1 + rng.uniform_int(2), 1 + rng.uniform_int(3));
        const GtmsWeights w = GtmsWeights::random(shape, rng, 0.6);
        const SpinConfig sigma = testutil::random_config(shape.n_sites, 2, rng);
        for (int j = 0; j < shape.n_blocks; ++j) {
            const Eigen::MatrixXcd got = transfer_matrix(shape, w, j, sigma);
            const Eigen::MatrixXcd want = naive_transfer(shape, w, j, sigma);
            CHECK((got - want).cwiseAbs().maxCoeff() / want.cwiseAbs().maxCoeff() < 1e-12);
        }
    }
}

TEST_CASE("zero weights count the auxiliary configurations") {
    const NetworkShape shape = NetworkShape::make(4, 4, 1, 2);
    const GtmsWeights w = GtmsWeights::zero(shape);
    const ScaledAmplitude amp = amplitude(shape, w, SpinConfig{1, 1, -1, -1});
    CHECK(rel_err(amp.value(), cplx(4096.0, 0.0)) < 1e-13);  // 2^{(m+n) N_T}
}

TEST_CASE("deep-free networks reduce to the closed-form hidden-layer product") {
    RngStream rng(31);
    const NetworkShape shape = NetworkShape::make(4, 3, 2, 2);
    GtmsWeights w = GtmsWeights::random(shape, rng, 0.4);
    w.strip_to_rbm();
    const SpinConfig sigma = testutil::random_config(4, 2, rng);

    cplx csum = 0.0;
    for (int i = 0; i < 4; ++i) csum += w.c(i) * static_cast<double>(sigma[i]);
    cplx closed = std::exp(csum);
    for (int j = 0; j < shape.n_blocks; ++j)
        for (int mu = 0; mu < shape.hidden_per_block; ++mu) {
            cplx phi = w.b(j, mu);
            for (int i = 0; i < 4; ++i) phi += static_cast<double>(sigma[i]) * w.w[j](i, mu);
            closed *= 2.0 * std::cosh(phi);
        }
    const double deep_count = std::pow(2.0, shape.deep_per_block * shape.n_blocks);
    const ScaledAmplitude amp = amplitude(shape, w, sigma);
    CHECK(rel_err(amp.value(), deep_count * closed) < 1e-10);
}

TEST_CASE("amplitude equals the brute-force partition sum") {
    RngStream rng(7);
    const NetworkShape shape = small_shape();
    for (int trial = 0; trial < 20; ++trial) {
        const GtmsWeights w = GtmsWeights::random(shape, rng, 0.5);
        const SpinConfig sigma = testutil::random_config(3, 2, rng);
        const cplx got = amplitude(shape, w, sigma).value();
        const cplx want = oracle::brute_force_amplitude(shape, w, sigma);
        CHECK(rel_err(got, want) < 1e-10);
    }
}

TEST_CASE("open-boundary amplitude agrees with the boundary-vector contraction") {
    RngStream rng(13);
    const NetworkShape shape = NetworkShape::make(3, 3, 1, 2, 2, Boundary::Open);
    for (int trial = 0; trial < 10; ++trial) {
        const GtmsWeights w = GtmsWeights::random(shape, rng, 0.5);
        const SpinConfig sigma = testutil::random_config(3, 2, rng);

        // ones^T T_1 (bulk product) V with V built from angles that omit the
        // couplings into the next block
        const int chi = shape.chi();
        Eigen::RowVectorXcd v = Eigen::RowVectorXcd::Ones(chi);
        for (int j = 0; j + 1 < shape.n_blocks; ++j)
            v *= naive_transfer(shape, w, j, sigma);
        const Eigen::MatrixXcd last =
            naive_transfer(shape, w, shape.n_blocks - 1, sigma, /*drop_hat=*/true);
        const Eigen::VectorXcd V = last.col(0);  // entries are column-independent
        cplx csum = 0.0;
        for (int i = 0; i < 3; ++i) csum += w.c(i) * static_cast<double>(sigma[i]);
        const cplx want = std::exp(csum) * (v * V)(0, 0);

        CHECK(rel_err(amplitude(shape, w, sigma).value(), want) < 1e-12);
        CHECK(rel_err(oracle::brute_force_amplitude(shape, w, sigma), want) < 1e-10);
    }
}

TEST_CASE("log ratio of identical configurations is zero") {
    RngStream rng(17);
    const NetworkShape shape = small_shape();
    const GtmsWeights w = GtmsWeights::random(shape, rng);
    const SpinConfig sigma{1, -1, 1};
    CHECK(std::abs(log_amplitude_ratio(shape, w, sigma, sigma)) < 1e-14);
}

TEST_CASE("log ratio matches direct quotients") {
    RngStream rng(19);
    const NetworkShape shape = NetworkShape::make(6, 6, 1, 2);
    const GtmsWeights w = GtmsWeights::random(shape, rng, 0.3);
    for (int trial = 0; trial < 10; ++trial) {
        const SpinConfig sa = testutil::random_config(6, 2, rng);
        const SpinConfig sb = testutil::random_config(6, 2, rng);
        const cplx lr = log_amplitude_ratio(shape, w, sa, sb);
        const cplx direct = amplitude(shape, w, sa).value() / amplitude(shape, w, sb).value();
        CHECK(rel_err(std::exp(lr), direct) < 1e-12);
    }
}

TEST_CASE("uniform amplitudes give zero log ratios") {
    const NetworkShape shape = small_shape();
    const GtmsWeights w = GtmsWeights::zero(shape);
    CHECK(std::abs(log_amplitude_ratio(shape, w, SpinConfig{1, 1, 1}, SpinConfig{-1, 1, -1})) <
          1e-13);
}

TEST_CASE("adding a constant to the physical biases rescales amplitudes predictably") {
    RngStream rng(23);
    const NetworkShape shape = NetworkShape::make(4, 4, 1, 2);
    GtmsWeights w = GtmsWeights::random(shape, rng, 0.4);
    const cplx kappa(0.37, -0.21);
    GtmsWeights shifted = w;
    shifted.c.array() += kappa;
    for (int trial = 0; trial < 6; ++trial) {
        const SpinConfig sigma = testutil::random_config(4, 2, rng);
        int mag = 0;
        for (int v : sigma) mag += v;
        const cplx factor = std::exp(kappa * static_cast<double>(mag));
        const cplx base = amplitude(shape, w, sigma).value();
        const cplx moved = amplitude(shape, shifted, sigma).value();
        CHECK(rel_err(moved, factor * base) < 1e-12);
    }
    // ratios between equal-magnetization configurations are unchanged
    const SpinConfig sa{1, -1, 1, -1}, sb{-1, 1, 1, -1};
    CHECK(rel_err(std::exp(log_amplitude_ratio(shape, w, sa, sb)),
                  std::exp(log_amplitude_ratio(shape, shifted, sa, sb))) < 1e-12);
}

TEST_CASE("physical-bias derivatives are the total magnetization") {
    RngStream rng(29);
    const NetworkShape shape = small_shape();
    const GtmsWeights w = GtmsWeights::random(shape, rng);
    const ParamLayout layout = ParamLayout::untied(shape);
    const SpinConfig sigma{1, -1, -1};
    const Eigen::VectorXcd derivs = log_derivatives(shape, w, sigma, layout);
    // slots 0..2N-1 interleave the physical biases
    CHECK(rel_err(derivs(0), cplx(1, 0)) < 1e-14);
    CHECK(rel_err(derivs(1), cplx(0, 1)) < 1e-14);
    CHECK(rel_err(derivs(2), cplx(-1, 0)) < 1e-14);
    CHECK(rel_err(derivs(4), cplx(-1, 0)) < 1e-14);
}

TEST_CASE("hidden-bias derivatives vanish at zero weights") {
    const NetworkShape shape = small_shape();
    const GtmsWeights w = GtmsWeights::zero(shape);
    const ParamLayout layout = ParamLayout::untied(shape);
    const Eigen::VectorXcd derivs = log_derivatives(shape, w, SpinConfig{1, 1, -1}, layout);
    // the first b slot sits right after the N physical biases
    CHECK(std::abs(derivs(2 * 3)) < 1e-14);
}

TEST_CASE("log derivatives match finite differences everywhere") {
    RngStream rng(37);
    const struct {
        NetworkShape shape;
        bool tied;
        int rbm_range;
    } cases[] = {
        {NetworkShape::make(4, 4, 1, 2), false, 0},
        {NetworkShape::make(3, 3, 2, 2), false, 0},
        {NetworkShape::make(4, 3, 1, 2), false, 0},          // N_T != N
        {NetworkShape::make(3, 3, 1, 2, 3), false, 0},       // spin-1
        {NetworkShape::make(4, 4, 1, 2, 2, Boundary::Open), false, 0},
        {NetworkShape::make(4, 4, 2, 2), true, 3},
        {NetworkShape::make(4, 4, 1, 2), true, 0},
    };
    for (const auto& tc : cases) {
        const ParamLayout layout = tc.tied ? ParamLayout::tied(tc.shape, tc.rbm_range)
                                           : ParamLayout::untied(tc.shape);
        Eigen::VectorXd flat;
        GtmsWeights w = GtmsWeights::zero(tc.shape);
        if (tc.tied) {
            const TiedWeights t = TiedWeights::random(tc.shape, tc.rbm_range, rng, 0.25);
            flat = flatten(t, layout);
            w = tie(t, tc.shape);
        } else {
            w = GtmsWeights::random(tc.shape, rng, 0.25);
            flat = flatten(w, layout);
        }
        const SpinConfig sigma =
            testutil::random_config(tc.shape.n_sites, tc.shape.local_dim, rng);
        const Eigen::VectorXcd derivs = log_derivatives(tc.shape, w, sigma, layout);
        REQUIRE(derivs.size() == static_cast<Eigen::Index>(layout.n_real()));
        for (Eigen::Index k = 0; k < derivs.size(); ++k) {
            const cplx fd = testutil::fd_log_derivative(tc.shape, flat, layout, k, sigma);
            const double scale = std::max({std::abs(fd), std::abs(derivs(k)), 1e-8});
            CHECK(std::abs(derivs(k) - fd) / scale < 1e-6);
        }
    }
}

TEST_CASE("derivatives below the amplitude floor are refused") {
    // the valence-bond ring annihilates two aligned extremal spins in a row;
    // that amplitude is zero up to roundoff and sits far below a 1e-6 floor
    const NetworkShape shape = NetworkShape::make(2, 2, 1, 2, 3);
    GtmsWeights w = GtmsWeights::zero(shape);
    const BlockWeights blk = aklt_weights();
    for (int j = 0; j < 2; ++j) {
        w.b.row(j) = blk.b.transpose();
        w.w[j].row(j) = blk.w.transpose();
        w.w_tilde[j] = blk.w_tilde;
        w.w_hat[j] = blk.w_hat;
    }
    GtmsEvaluator ev(shape, w);
    ev.set_amplitude_floor(1e-6);
    const ParamLayout layout = ParamLayout::untied(shape);
    CHECK_THROWS_AS(ev.log_derivatives(SpinConfig{1, 1}, layout), AmplitudeTooSmall);
    // and the aligned pair separated by the zero value is annihilated as well
    CHECK(ev.amplitude(SpinConfig{1, 1}).log_abs() < std::log(1e-10));
}

TEST_CASE("scaled representation stays finite far outside double range") {
    // biases push each factor to e^{25}; the plain value would overflow a
    // double long before 60 blocks
    const int N = 60;
    const NetworkShape shape = NetworkShape::make(N, N, 1, 2);
    GtmsWeights w = GtmsWeights::zero(shape);
    w.b.array() += cplx(25.0, 0.3);
    const SpinConfig sigma(N, 1);
    const ScaledAmplitude amp = amplitude(shape, w, sigma);
    CHECK(std::isfinite(amp.log_scale));
    CHECK(amp.log_scale > 700.0);
    CHECK(rel_err(std::abs(amp.mantissa), 1.0) < 1e-12);
}

TEST_CASE("the large-angle path agrees with an independent log-space evaluation") {
    RngStream rng(41);
    const NetworkShape shape = NetworkShape::make(2, 2, 1, 1);
    GtmsWeights w = GtmsWeights::random(shape, rng, 0.3);
    GtmsWeights big = w;
    big.b.array() += cplx(400.0, 0.0);
    const SpinConfig sigma{1, -1};
    const ScaledAmplitude got = amplitude(shape, big, sigma);
    REQUIRE(std::isfinite(got.log_scale));

    // 2 cosh(phi) = e^{phi}(1 + e^{-2 phi}) for Re(phi) > 0: assemble the trace
    // with the common factor e^{400} pulled out of every entry
    Eigen::Matrix2cd prod = Eigen::Matrix2cd::Identity();
    double log_off = 0.0;
    cplx csum = 0.0;
    for (int i = 0; i < 2; ++i) csum += w.c(i) * static_cast<double>(sigma[i]);
    for (int j = 0; j < 2; ++j) {
        Eigen::Matrix2cd T;
        for (int r = 0; r < 2; ++r)
            for (int col = 0; col < 2; ++col) {
                cplx phi = big.b(j, 0);
                for (int i = 0; i < 2; ++i)
                    phi += static_cast<double>(sigma[i]) * w.w[j](i, 0);
                phi += w.w_tilde[j](0, 0) * static_cast<double>(deep_sign(r, 0)) +
                       w.w_hat[j](0, 0) * static_cast<double>(deep_sign(col, 0));
                const cplx ea = w.a(j, 0) * static_cast<double>(deep_sign(r, 0));
                T(r, col) = std::exp(ea + (phi - 400.0)) * (1.0 + std::exp(-2.0 * phi));
            }
        prod *= T;
        log_off += 400.0;
    }
    const cplx want_log = std::log(prod.trace()) + log_off + csum;
    CHECK(std::abs(got.log().real() - want_log.real()) <
          1e-10 * std::abs(want_log.real()));
}

TEST_CASE("canonical zero representation") {
    const ScaledAmplitude z = ScaledAmplitude::zero();
    CHECK(z.is_zero());
    CHECK(z.log_scale == 0.0);
    CHECK(z.value() == cplx(0.0, 0.0));
    CHECK(ScaledAmplitude::from_value(cplx(0.0, 0.0)).is_zero());
}

}  // TEST_SUITE
