#include "gtms/model.hpp"

#include <cassert>

namespace gtms {

void NetworkShape::validate() const {
    if (n_sites < 1 || n_blocks < 1 || deep_per_block < 1 || hidden_per_block < 1)
        throw ShapeMismatch("all shape counts must be >= 1");
    if (local_dim != 2 && local_dim != 3)
        throw ShapeMismatch("local_dim must be 2 or 3");
    if (deep_per_block > 20)
        throw ShapeMismatch("deep_per_block too large for dense transfer matrices");
}

std::vector<int> local_values(int local_dim) {
    if (local_dim == 2) return {+1, -1};
    return {+1, 0, -1};
}

GtmsWeights GtmsWeights::zero(const NetworkShape& shape) {
    shape.validate();
    const int nt = shape.n_blocks, n = shape.deep_per_block, m = shape.hidden_per_block;
    GtmsWeights w;
    w.c = Eigen::VectorXcd::Zero(shape.n_sites);
    w.b = Eigen::MatrixXcd::Zero(nt, m);
    w.a = Eigen::MatrixXcd::Zero(nt, n);
    w.w.assign(nt, Eigen::MatrixXcd::Zero(shape.n_sites, m));
    w.w_tilde.assign(nt, Eigen::MatrixXcd::Zero(m, n));
    w.w_hat.assign(nt, Eigen::MatrixXcd::Zero(m, n));
    return w;
}

namespace {

void fill_random(Eigen::MatrixXcd& mat, RngStream& rng, double width) {
    for (Eigen::Index i = 0; i < mat.rows(); ++i)
        for (Eigen::Index j = 0; j < mat.cols(); ++j)
            mat(i, j) = rng.complex_uniform(width, width);
}

}  // namespace

GtmsWeights GtmsWeights::random(const NetworkShape& shape, RngStream& rng, double width) {
    GtmsWeights w = zero(shape);
    for (Eigen::Index i = 0; i < w.c.size(); ++i) w.c(i) = rng.complex_uniform(width, width);
    fill_random(w.b, rng, width);
    fill_random(w.a, rng, width);
    for (auto& mat : w.w) fill_random(mat, rng, width);
    for (auto& mat : w.w_tilde) fill_random(mat, rng, width);
    for (auto& mat : w.w_hat) fill_random(mat, rng, width);
    if (shape.boundary == Boundary::Open) w.w_hat.back().setZero();
    return w;
}

bool GtmsWeights::is_mps_only(const NetworkShape& shape) const {
    if (shape.n_blocks != shape.n_sites) return false;
    for (int j = 0; j < shape.n_blocks; ++j)
        for (int i = 0; i < shape.n_sites; ++i)
            if (i != j && w[j].row(i).cwiseAbs().maxCoeff() != 0.0) return false;
    return true;
}

bool GtmsWeights::is_rbm_only() const {
    if (a.cwiseAbs().maxCoeff() != 0.0) return false;
    for (const auto& mat : w_tilde)
        if (mat.size() > 0 && mat.cwiseAbs().maxCoeff() != 0.0) return false;
    for (const auto& mat : w_hat)
        if (mat.size() > 0 && mat.cwiseAbs().maxCoeff() != 0.0) return false;
    return true;
}

void GtmsWeights::strip_to_mps(const NetworkShape& shape) {
    if (shape.n_blocks != shape.n_sites)
        throw ShapeMismatch("the MPS limit needs one block per site");
    for (int j = 0; j < shape.n_blocks; ++j)
        for (int i = 0; i < shape.n_sites; ++i)
            if (i != j) w[j].row(i).setZero();
}

void GtmsWeights::strip_to_rbm() {
    a.setZero();
    for (auto& mat : w_tilde) mat.setZero();
    for (auto& mat : w_hat) mat.setZero();
}

void validate(const NetworkShape& shape, const GtmsWeights& weights) {
    shape.validate();
    const int nt = shape.n_blocks, n = shape.deep_per_block, m = shape.hidden_per_block;
    if (weights.c.size() != shape.n_sites)
        throw DimensionMismatch("c", shape.n_sites, weights.c.size());
    if (weights.b.rows() != nt || weights.b.cols() != m)
        throw DimensionMismatch("b", static_cast<long>(nt) * m, weights.b.size());
    if (weights.a.rows() != nt || weights.a.cols() != n)
        throw DimensionMismatch("a", static_cast<long>(nt) * n, weights.a.size());
    if (static_cast<int>(weights.w.size()) != nt)
        throw DimensionMismatch("w", nt, static_cast<long>(weights.w.size()));
    if (static_cast<int>(weights.w_tilde.size()) != nt)
        throw DimensionMismatch("w_tilde", nt, static_cast<long>(weights.w_tilde.size()));
    if (static_cast<int>(weights.w_hat.size()) != nt)
        throw DimensionMismatch("w_hat", nt, static_cast<long>(weights.w_hat.size()));
    for (int j = 0; j < nt; ++j) {
        if (weights.w[j].rows() != shape.n_sites || weights.w[j].cols() != m)
            throw DimensionMismatch("w[" + std::to_string(j) + "]",
                                    static_cast<long>(shape.n_sites) * m, weights.w[j].size());
        if (weights.w_tilde[j].rows() != m || weights.w_tilde[j].cols() != n)
            throw DimensionMismatch("w_tilde[" + std::to_string(j) + "]",
                                    static_cast<long>(m) * n, weights.w_tilde[j].size());
        if (weights.w_hat[j].rows() != m || weights.w_hat[j].cols() != n)
            throw DimensionMismatch("w_hat[" + std::to_string(j) + "]",
                                    static_cast<long>(m) * n, weights.w_hat[j].size());
    }
    if (shape.boundary == Boundary::Open &&
        weights.w_hat.back().cwiseAbs().maxCoeff() != 0.0)
        throw OpenBoundaryViolation();
}

TiedWeights TiedWeights::zero(const NetworkShape& shape, int rbm_range) {
    shape.validate();
    if (rbm_range < 0 || rbm_range > shape.n_sites - 1)
        throw ShapeMismatch("rbm_range must lie in [0, N-1]");
    TiedWeights t;
    t.b = Eigen::VectorXcd::Zero(shape.hidden_per_block);
    t.a = Eigen::VectorXcd::Zero(shape.deep_per_block);
    t.w_by_distance.assign(shape.n_sites, Eigen::VectorXcd::Zero(shape.hidden_per_block));
    t.w_tilde = Eigen::MatrixXcd::Zero(shape.hidden_per_block, shape.deep_per_block);
    t.w_hat = Eigen::MatrixXcd::Zero(shape.hidden_per_block, shape.deep_per_block);
    t.rbm_range = rbm_range;
    return t;
}

TiedWeights TiedWeights::random(const NetworkShape& shape, int rbm_range, RngStream& rng,
                                double width) {
    TiedWeights t = zero(shape, rbm_range);
    t.c = rng.complex_uniform(width, width);
    for (Eigen::Index k = 0; k < t.b.size(); ++k) t.b(k) = rng.complex_uniform(width, width);
    for (Eigen::Index k = 0; k < t.a.size(); ++k) t.a(k) = rng.complex_uniform(width, width);
    for (int d = 0; d <= rbm_range; ++d)
        for (Eigen::Index k = 0; k < t.w_by_distance[d].size(); ++k)
            t.w_by_distance[d](k) = rng.complex_uniform(width, width);
    fill_random(t.w_tilde, rng, width);
    fill_random(t.w_hat, rng, width);
    return t;
}

GtmsWeights tie(const TiedWeights& tied, const NetworkShape& shape) {
    if (shape.n_blocks != shape.n_sites)
        throw ShapeMismatch("weight tying requires one block per site");
    if (shape.boundary != Boundary::Periodic)
        throw ShapeMismatch("weight tying requires periodic boundaries");
    const int N = shape.n_sites;
    GtmsWeights w = GtmsWeights::zero(shape);
    w.c.setConstant(tied.c);
    for (int j = 0; j < N; ++j) {
        w.b.row(j) = tied.b.transpose();
        w.a.row(j) = tied.a.transpose();
        w.w_tilde[j] = tied.w_tilde;
        w.w_hat[j] = tied.w_hat;
        // site i couples to block i+d, so block j sees site (j-d) mod N at distance d
        for (int d = 0; d < N; ++d) {
            if (d > tied.rbm_range) continue;
            const int i = ((j - d) % N + N) % N;
            w.w[j].row(i) = tied.w_by_distance[d].transpose();
        }
    }
    return w;
}

TiedWeights untie(const GtmsWeights& weights, const NetworkShape& shape, int rbm_range) {
    if (shape.n_blocks != shape.n_sites)
        throw ShapeMismatch("weight tying requires one block per site");
    const int N = shape.n_sites;
    TiedWeights t = TiedWeights::zero(shape, rbm_range);
    t.c = weights.c(0);
    t.b = weights.b.row(0).transpose();
    t.a = weights.a.row(0).transpose();
    t.w_tilde = weights.w_tilde[0];
    t.w_hat = weights.w_hat[0];
    for (int d = 0; d <= rbm_range && d < N; ++d)
        t.w_by_distance[d] = weights.w[d % N].row(0).transpose();
    return t;
}

ParamLayout ParamLayout::untied(const NetworkShape& shape) {
    shape.validate();
    ParamLayout l;
    l.kind = LayoutKind::Untied;
    l.shape = shape;
    const long N = shape.n_sites, nt = shape.n_blocks;
    const long n = shape.deep_per_block, m = shape.hidden_per_block;
    long hat_blocks = (shape.boundary == Boundary::Open) ? nt - 1 : nt;
    l.n_complex = static_cast<std::size_t>(N + nt * m + nt * n + N * nt * m + nt * m * n +
                                           hat_blocks * m * n);
    return l;
}

ParamLayout ParamLayout::tied(const NetworkShape& shape, int rbm_range) {
    shape.validate();
    if (rbm_range < 0 || rbm_range > shape.n_sites - 1)
        throw ShapeMismatch("rbm_range must lie in [0, N-1]");
    ParamLayout l;
    l.kind = LayoutKind::Tied;
    l.shape = shape;
    l.rbm_range = rbm_range;
    const long n = shape.deep_per_block, m = shape.hidden_per_block;
    l.n_complex = static_cast<std::size_t>(1 + m + n + (rbm_range + 1) * m + 2 * m * n);
    return l;
}

ParamLayout ParamLayout::block(int n, int m) {
    if (n < 1 || m < 1) throw ShapeMismatch("block layout needs n, m >= 1");
    ParamLayout l;
    l.kind = LayoutKind::Block;
    l.block_n = n;
    l.block_m = m;
    l.n_complex = static_cast<std::size_t>(1 + 2 * m + n + 2 * m * n);
    return l;
}

namespace {

struct FlatWriter {
    Eigen::VectorXd& out;
    Eigen::Index pos = 0;
    void put(cplx z) {
        out(pos++) = z.real();
        out(pos++) = z.imag();
    }
    void put(const Eigen::MatrixXcd& mat) {  // row-major order
        for (Eigen::Index i = 0; i < mat.rows(); ++i)
            for (Eigen::Index j = 0; j < mat.cols(); ++j) put(mat(i, j));
    }
};

struct FlatReader {
    const Eigen::VectorXd& in;
    Eigen::Index pos = 0;
    cplx get() {
        const double re = in(pos++), im = in(pos++);
        return {re, im};
    }
    void get(Eigen::MatrixXcd& mat) {
        for (Eigen::Index i = 0; i < mat.rows(); ++i)
            for (Eigen::Index j = 0; j < mat.cols(); ++j) mat(i, j) = get();
    }
};

}  // namespace

Eigen::VectorXd flatten(const GtmsWeights& weights, const ParamLayout& layout) {
    if (layout.kind != LayoutKind::Untied)
        throw ShapeMismatch("layout kind does not match GtmsWeights");
    validate(layout.shape, weights);
    const int nt = layout.shape.n_blocks;
    const int hat_blocks = (layout.shape.boundary == Boundary::Open) ? nt - 1 : nt;
    Eigen::VectorXd flat(layout.n_real());
    FlatWriter wr{flat};
    for (Eigen::Index i = 0; i < weights.c.size(); ++i) wr.put(weights.c(i));
    wr.put(weights.b);
    wr.put(weights.a);
    for (int j = 0; j < nt; ++j) wr.put(weights.w[j]);
    for (int j = 0; j < nt; ++j) wr.put(weights.w_tilde[j]);
    for (int j = 0; j < hat_blocks; ++j) wr.put(weights.w_hat[j]);
    return flat;
}

GtmsWeights unflatten_weights(const Eigen::VectorXd& flat, const ParamLayout& layout) {
    if (layout.kind != LayoutKind::Untied)
        throw ShapeMismatch("layout kind does not match GtmsWeights");
    if (flat.size() != static_cast<Eigen::Index>(layout.n_real()))
        throw LengthMismatch(static_cast<long>(layout.n_real()), flat.size());
    const int nt = layout.shape.n_blocks;
    const int hat_blocks = (layout.shape.boundary == Boundary::Open) ? nt - 1 : nt;
    GtmsWeights w = GtmsWeights::zero(layout.shape);
    FlatReader rd{flat};
    for (Eigen::Index i = 0; i < w.c.size(); ++i) w.c(i) = rd.get();
    rd.get(w.b);
    rd.get(w.a);
    for (int j = 0; j < nt; ++j) rd.get(w.w[j]);
    for (int j = 0; j < nt; ++j) rd.get(w.w_tilde[j]);
    for (int j = 0; j < hat_blocks; ++j) rd.get(w.w_hat[j]);
    return w;
}

Eigen::VectorXd flatten(const TiedWeights& tied, const ParamLayout& layout) {
    if (layout.kind != LayoutKind::Tied)
        throw ShapeMismatch("layout kind does not match TiedWeights");
    if (tied.rbm_range != layout.rbm_range)
        throw ShapeMismatch("layout rbm_range does not match TiedWeights");
    Eigen::VectorXd flat(layout.n_real());
    FlatWriter wr{flat};
    wr.put(tied.c);
    for (Eigen::Index k = 0; k < tied.b.size(); ++k) wr.put(tied.b(k));
    for (Eigen::Index k = 0; k < tied.a.size(); ++k) wr.put(tied.a(k));
    for (int d = 0; d <= layout.rbm_range; ++d)
        for (Eigen::Index k = 0; k < tied.w_by_distance[d].size(); ++k)
            wr.put(tied.w_by_distance[d](k));
    wr.put(tied.w_tilde);
    wr.put(tied.w_hat);
    return flat;
}

TiedWeights unflatten_tied(const Eigen::VectorXd& flat, const ParamLayout& layout) {
    if (layout.kind != LayoutKind::Tied)
        throw ShapeMismatch("layout kind does not match TiedWeights");
    if (flat.size() != static_cast<Eigen::Index>(layout.n_real()))
        throw LengthMismatch(static_cast<long>(layout.n_real()), flat.size());
    TiedWeights t = TiedWeights::zero(layout.shape, layout.rbm_range);
    FlatReader rd{flat};
    t.c = rd.get();
    for (Eigen::Index k = 0; k < t.b.size(); ++k) t.b(k) = rd.get();
    for (Eigen::Index k = 0; k < t.a.size(); ++k) t.a(k) = rd.get();
    for (int d = 0; d <= layout.rbm_range; ++d)
        for (Eigen::Index k = 0; k < t.w_by_distance[d].size(); ++k)
            t.w_by_distance[d](k) = rd.get();
    rd.get(t.w_tilde);
    rd.get(t.w_hat);
    return t;
}

}  // namespace gtms
