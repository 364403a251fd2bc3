#include "gtms/serialize.hpp"

#include <fstream>

namespace gtms {

namespace {

json cplx_to_json(cplx z) { return json::array({z.real(), z.imag()}); }

cplx cplx_from_json(const json& j) {
    if (!j.is_array() || j.size() != 2) throw ConfigError("complex values must be [re, im]");
    return {j[0].get<double>(), j[1].get<double>()};
}

json matrix_to_json(const Eigen::MatrixXcd& mat) {
    json rows = json::array();
    for (Eigen::Index i = 0; i < mat.rows(); ++i) {
        json row = json::array();
        for (Eigen::Index k = 0; k < mat.cols(); ++k) row.push_back(cplx_to_json(mat(i, k)));
        rows.push_back(std::move(row));
    }
    return rows;
}

Eigen::MatrixXcd matrix_from_json(const json& j, Eigen::Index rows, Eigen::Index cols,
                                  const std::string& name) {
    if (!j.is_array() || static_cast<Eigen::Index>(j.size()) != rows)
        throw DimensionMismatch(name, rows, static_cast<long>(j.size()));
    Eigen::MatrixXcd mat(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i) {
        const json& row = j[i];
        if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != cols)
            throw DimensionMismatch(name, cols, static_cast<long>(row.size()));
        for (Eigen::Index k = 0; k < cols; ++k) mat(i, k) = cplx_from_json(row[k]);
    }
    return mat;
}

json vector_to_json(const Eigen::VectorXcd& v) {
    json out = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(cplx_to_json(v(i)));
    return out;
}

Eigen::VectorXcd vector_from_json(const json& j, Eigen::Index size, const std::string& name) {
    if (!j.is_array() || static_cast<Eigen::Index>(j.size()) != size)
        throw DimensionMismatch(name, size, static_cast<long>(j.size()));
    Eigen::VectorXcd v(size);
    for (Eigen::Index i = 0; i < size; ++i) v(i) = cplx_from_json(j[i]);
    return v;
}

}  // namespace

json to_json(const NetworkShape& shape) {
    return json{{"n_sites", shape.n_sites},
                {"n_blocks", shape.n_blocks},
                {"deep_per_block", shape.deep_per_block},
                {"hidden_per_block", shape.hidden_per_block},
                {"local_dim", shape.local_dim},
                {"boundary", shape.boundary == Boundary::Periodic ? "periodic" : "open"}};
}

NetworkShape shape_from_json(const json& j) {
    NetworkShape shape;
    shape.n_sites = j.at("n_sites").get<int>();
    shape.n_blocks = j.at("n_blocks").get<int>();
    shape.deep_per_block = j.at("deep_per_block").get<int>();
    shape.hidden_per_block = j.at("hidden_per_block").get<int>();
    shape.local_dim = j.at("local_dim").get<int>();
    const std::string b = j.at("boundary").get<std::string>();
    if (b == "periodic")
        shape.boundary = Boundary::Periodic;
    else if (b == "open")
        shape.boundary = Boundary::Open;
    else
        throw ConfigError("boundary must be 'periodic' or 'open'");
    shape.validate();
    return shape;
}

json to_json(const NetworkShape& shape, const GtmsWeights& weights) {
    validate(shape, weights);
    json w;
    w["c"] = vector_to_json(weights.c);
    w["b"] = matrix_to_json(weights.b);
    w["a"] = matrix_to_json(weights.a);
    json ws = json::array(), wt = json::array(), wh = json::array();
    for (int j = 0; j < shape.n_blocks; ++j) {
        ws.push_back(matrix_to_json(weights.w[j]));
        wt.push_back(matrix_to_json(weights.w_tilde[j]));
        wh.push_back(matrix_to_json(weights.w_hat[j]));
    }
    w["w"] = std::move(ws);
    w["w_tilde"] = std::move(wt);
    w["w_hat"] = std::move(wh);
    return json{{"format_version", 1}, {"shape", to_json(shape)}, {"weights", std::move(w)}};
}

GtmsWeights weights_from_json(const json& j, NetworkShape* shape_out) {
    if (j.at("format_version").get<int>() != 1) throw ConfigError("unknown weight format version");
    const NetworkShape shape = shape_from_json(j.at("shape"));
    const json& w = j.at("weights");
    GtmsWeights out = GtmsWeights::zero(shape);
    out.c = vector_from_json(w.at("c"), shape.n_sites, "c");
    out.b = matrix_from_json(w.at("b"), shape.n_blocks, shape.hidden_per_block, "b");
    out.a = matrix_from_json(w.at("a"), shape.n_blocks, shape.deep_per_block, "a");
    for (int blk = 0; blk < shape.n_blocks; ++blk) {
        out.w[blk] = matrix_from_json(w.at("w")[blk], shape.n_sites, shape.hidden_per_block, "w");
        out.w_tilde[blk] = matrix_from_json(w.at("w_tilde")[blk], shape.hidden_per_block,
                                            shape.deep_per_block, "w_tilde");
        out.w_hat[blk] = matrix_from_json(w.at("w_hat")[blk], shape.hidden_per_block,
                                          shape.deep_per_block, "w_hat");
    }
    validate(shape, out);
    if (shape_out) *shape_out = shape;
    return out;
}

json to_json(const NetworkShape& shape, const TiedWeights& tied) {
    json w;
    w["c"] = cplx_to_json(tied.c);
    w["b"] = vector_to_json(tied.b);
    w["a"] = vector_to_json(tied.a);
    json wd = json::array();
    for (const auto& v : tied.w_by_distance) wd.push_back(vector_to_json(v));
    w["w_by_distance"] = std::move(wd);
    w["w_tilde"] = matrix_to_json(tied.w_tilde);
    w["w_hat"] = matrix_to_json(tied.w_hat);
    w["rbm_range"] = tied.rbm_range;
    return json{{"format_version", 1},
                {"tied", true},
                {"shape", to_json(shape)},
                {"weights", std::move(w)}};
}

TiedWeights tied_from_json(const json& j, NetworkShape* shape_out) {
    if (j.at("format_version").get<int>() != 1) throw ConfigError("unknown weight format version");
    const NetworkShape shape = shape_from_json(j.at("shape"));
    const json& w = j.at("weights");
    TiedWeights out = TiedWeights::zero(shape, w.at("rbm_range").get<int>());
    out.c = cplx_from_json(w.at("c"));
    out.b = vector_from_json(w.at("b"), shape.hidden_per_block, "b");
    out.a = vector_from_json(w.at("a"), shape.deep_per_block, "a");
    const json& wd = w.at("w_by_distance");
    if (static_cast<int>(wd.size()) != shape.n_sites)
        throw DimensionMismatch("w_by_distance", shape.n_sites, static_cast<long>(wd.size()));
    for (int d = 0; d < shape.n_sites; ++d)
        out.w_by_distance[d] = vector_from_json(wd[d], shape.hidden_per_block, "w_by_distance");
    out.w_tilde = matrix_from_json(w.at("w_tilde"), shape.hidden_per_block,
                                   shape.deep_per_block, "w_tilde");
    out.w_hat = matrix_from_json(w.at("w_hat"), shape.hidden_per_block,
                                 shape.deep_per_block, "w_hat");
    if (shape_out) *shape_out = shape;
    return out;
}

json to_json(const BlockWeights& block) {
    return json{{"format_version", 1},
                {"n", block.n()},
                {"m", block.m()},
                {"c", cplx_to_json(block.c)},
                {"b", vector_to_json(block.b)},
                {"a", vector_to_json(block.a)},
                {"w", vector_to_json(block.w)},
                {"w_tilde", matrix_to_json(block.w_tilde)},
                {"w_hat", matrix_to_json(block.w_hat)}};
}

BlockWeights block_from_json(const json& j) {
    const int n = j.at("n").get<int>(), m = j.at("m").get<int>();
    BlockWeights blk = BlockWeights::zero(n, m);
    blk.c = cplx_from_json(j.at("c"));
    blk.b = vector_from_json(j.at("b"), m, "b");
    blk.a = vector_from_json(j.at("a"), n, "a");
    blk.w = vector_from_json(j.at("w"), m, "w");
    blk.w_tilde = matrix_from_json(j.at("w_tilde"), m, n, "w_tilde");
    blk.w_hat = matrix_from_json(j.at("w_hat"), m, n, "w_hat");
    return blk;
}

void save_json(const json& j, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot open '" + path + "' for writing");
    out << j.dump(2) << "\n";
}

json load_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open '" + path + "'");
    return json::parse(in);
}

}  // namespace gtms
