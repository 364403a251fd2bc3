#include "doctest.h"

#include "gtms/model.hpp"
#include "gtms/serialize.hpp"
#include "test_util.hpp"

using namespace gtms;

TEST_SUITE("model") {

TEST_CASE("validate accepts matching arrays") {
    const NetworkShape shape = NetworkShape::make(3, 3, 1, 2);
    const GtmsWeights w = GtmsWeights::zero(shape);
    CHECK_NOTHROW(validate(shape, w));
}

TEST_CASE("validate rejects a block-count mismatch") {
    const NetworkShape shape4 = NetworkShape::make(3, 4, 1, 2);
    GtmsWeights w = GtmsWeights::zero(shape4);
    const NetworkShape shape3 = NetworkShape::make(3, 3, 1, 2);
    CHECK_THROWS_AS(validate(shape3, w), DimensionMismatch);
}

TEST_CASE("validate rejects wrap-around couplings under open boundaries") {
    NetworkShape shape = NetworkShape::make(3, 3, 1, 2, 2, Boundary::Open);
    GtmsWeights w = GtmsWeights::zero(shape);
    w.w_hat.back()(0, 0) = cplx(0.1, 0.0);
    CHECK_THROWS_AS(validate(shape, w), OpenBoundaryViolation);
    w.w_hat.back()(0, 0) = 0.0;
    CHECK_NOTHROW(validate(shape, w));
}

TEST_CASE("tie replicates an on-site-only distance vector into the MPS form") {
    const NetworkShape shape = NetworkShape::make(4, 4, 1, 2);
    TiedWeights t = TiedWeights::zero(shape, 0);
    t.w_by_distance[0] << cplx(0.3, -0.1), cplx(0.0, 0.2);
    t.b << cplx(0.1, 0.0), cplx(-0.2, 0.05);
    const GtmsWeights w = tie(t, shape);
    CHECK(w.is_mps_only(shape));
    for (int j = 1; j < 4; ++j) {
        CHECK(w.w[j](j, 0) == w.w[0](0, 0));
        CHECK(w.b.row(j) == w.b.row(0));
    }
    CHECK_NOTHROW(validate(shape, w));
}

TEST_CASE("tie wraps distances around the ring") {
    const NetworkShape shape = NetworkShape::make(4, 4, 1, 1);
    TiedWeights t = TiedWeights::zero(shape, 3);
    t.w_by_distance[1](0) = cplx(0.7, 0.1);
    const GtmsWeights w = tie(t, shape);
    // site i couples to block i+1: block 0 sees site 3
    CHECK(w.w[0](3, 0) == cplx(0.7, 0.1));
    CHECK(w.w[1](0, 0) == cplx(0.7, 0.1));
    CHECK(w.w[0](1, 0) == cplx(0.0, 0.0));
}

TEST_CASE("tie then untie is the identity") {
    const NetworkShape shape = NetworkShape::make(6, 6, 2, 3);
    RngStream rng(11);
    const TiedWeights t = TiedWeights::random(shape, 4, rng);
    const TiedWeights back = untie(tie(t, shape), shape, 4);
    CHECK(back.c == t.c);
    CHECK(back.b == t.b);
    CHECK(back.a == t.a);
    CHECK(back.w_tilde == t.w_tilde);
    CHECK(back.w_hat == t.w_hat);
    for (int d = 0; d < 6; ++d) CHECK(back.w_by_distance[d] == t.w_by_distance[d]);
}

TEST_CASE("tie demands one block per site and periodic boundaries") {
    const NetworkShape bad_blocks = NetworkShape::make(4, 3, 1, 1);
    const NetworkShape open = NetworkShape::make(4, 4, 1, 1, 2, Boundary::Open);
    TiedWeights t = TiedWeights::zero(NetworkShape::make(4, 4, 1, 1), 0);
    CHECK_THROWS_AS(tie(t, bad_blocks), ShapeMismatch);
    CHECK_THROWS_AS(tie(t, open), ShapeMismatch);
}

TEST_CASE("single-block parameter count") {
    // n = 2, m = 4 gives 1 + 2m + n + 2mn = 27 complex entries
    CHECK(ParamLayout::block(2, 4).n_complex == 27);
    CHECK(ParamLayout::block(2, 4).n_real() == 54);
    CHECK(ParamLayout::block(2, 8).n_complex == 51);
}

TEST_CASE("flatten of zero weights is the zero vector") {
    const NetworkShape shape = NetworkShape::make(3, 3, 1, 2);
    const ParamLayout layout = ParamLayout::untied(shape);
    const Eigen::VectorXd flat = flatten(GtmsWeights::zero(shape), layout);
    CHECK(flat.size() == static_cast<Eigen::Index>(layout.n_real()));
    CHECK(flat.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("flatten round-trips bit-identically") {
    RngStream rng(42);
    for (int trial = 0; trial < 20; ++trial) {
        const int N = 2 + rng.uniform_int(4);
        const int nt = 2 + rng.uniform_int(3);
        const Boundary b = rng.uniform() < 0.5 ? Boundary::Periodic : Boundary::Open;
        const NetworkShape shape =
            NetworkShape::make(N, nt, 1 + rng.uniform_int(2), 1 + rng.uniform_int(3), 2, b);
        const ParamLayout layout = ParamLayout::untied(shape);
        const GtmsWeights w = GtmsWeights::random(shape, rng, 0.5);
        const Eigen::VectorXd flat = flatten(w, layout);
        const GtmsWeights w2 = unflatten_weights(flat, layout);
        const Eigen::VectorXd flat2 = flatten(w2, layout);
        REQUIRE(flat.size() == flat2.size());
        CHECK(flat == flat2);
        CHECK(w2.c == w.c);
        for (int j = 0; j < nt; ++j) {
            CHECK(w2.w[j] == w.w[j]);
            CHECK(w2.w_hat[j] == w.w_hat[j]);
        }
    }
}

TEST_CASE("tied flatten round-trips and counts distances") {
    const NetworkShape shape = NetworkShape::make(60, 60, 2, 4);
    const ParamLayout layout = ParamLayout::tied(shape, 59);
    // 1 + m + n + N m + 2 m n at N = 60, n = 2, m = 4
    CHECK(layout.n_complex == 263);
    RngStream rng(3);
    const TiedWeights t = TiedWeights::random(shape, 59, rng);
    const TiedWeights t2 = unflatten_tied(flatten(t, layout), layout);
    CHECK(flatten(t2, layout) == flatten(t, layout));
}

TEST_CASE("unflatten rejects wrong lengths") {
    const NetworkShape shape = NetworkShape::make(3, 3, 1, 2);
    const ParamLayout layout = ParamLayout::untied(shape);
    CHECK_THROWS_AS(unflatten_weights(Eigen::VectorXd::Zero(layout.n_real() + 2), layout),
                    LengthMismatch);
}

TEST_CASE("open-boundary layout excludes the constrained couplings") {
    const NetworkShape periodic = NetworkShape::make(4, 4, 1, 2);
    const NetworkShape open = NetworkShape::make(4, 4, 1, 2, 2, Boundary::Open);
    const long mn = 2 * 1;
    CHECK(ParamLayout::untied(periodic).n_complex ==
          ParamLayout::untied(open).n_complex + mn);
}

TEST_CASE("stripping predicates are idempotent and reachable from a full network") {
    const NetworkShape shape = NetworkShape::make(4, 4, 1, 2);
    RngStream rng(9);
    GtmsWeights w = GtmsWeights::random(shape, rng);
    CHECK_FALSE(w.is_mps_only(shape));
    CHECK_FALSE(w.is_rbm_only());

    GtmsWeights mps = w;
    mps.strip_to_mps(shape);
    CHECK(mps.is_mps_only(shape));
    GtmsWeights mps2 = mps;
    mps2.strip_to_mps(shape);
    for (int j = 0; j < 4; ++j) CHECK(mps2.w[j] == mps.w[j]);

    GtmsWeights rbm = w;
    rbm.strip_to_rbm();
    CHECK(rbm.is_rbm_only());
    GtmsWeights rbm2 = rbm;
    rbm2.strip_to_rbm();
    CHECK(rbm2.a == rbm.a);
}

TEST_CASE("weights serialize to JSON and back") {
    const NetworkShape shape = NetworkShape::make(3, 4, 2, 2, 2, Boundary::Open);
    RngStream rng(8);
    const GtmsWeights w = GtmsWeights::random(shape, rng);
    NetworkShape shape2;
    const GtmsWeights w2 = weights_from_json(to_json(shape, w), &shape2);
    CHECK(shape2.n_blocks == 4);
    CHECK(shape2.boundary == Boundary::Open);
    CHECK(w2.c == w.c);
    for (int j = 0; j < 4; ++j) CHECK(w2.w_tilde[j] == w.w_tilde[j]);

    const NetworkShape tshape = NetworkShape::make(6, 6, 1, 2);
    const TiedWeights t = TiedWeights::random(tshape, 2, rng);
    const TiedWeights t2 = tied_from_json(to_json(tshape, t));
    CHECK(t2.rbm_range == 2);
    CHECK(t2.b == t.b);
    CHECK(t2.w_by_distance[2] == t.w_by_distance[2]);
}

}  // TEST_SUITE
