// io.hpp: JSON model/matrix formats and the report envelope shared by all commands

#pragma once

#include "qds/hash.hpp"
#include "qds/model.hpp"

#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <string>

namespace qds {

using Json = nlohmann::ordered_json;

// Input that does not match the file format; the message starts with the JSON path.
class ParseError : public StructuralError {
public:
    ParseError(const std::string& path, const std::string& what)
        : StructuralError(path + ": " + what), path_(path) {}
    const std::string& path() const { return path_; }

private:
    std::string path_;
};

// ---- matrices: array of rows, each entry a [re, im] pair ----

inline Json matrix_to_json(const Matrix& m) {
    Json rows = Json::array();
    for (Index i = 0; i < m.rows(); ++i) {
        Json row = Json::array();
        for (Index j = 0; j < m.cols(); ++j) row.push_back({m(i, j).real(), m(i, j).imag()});
        rows.push_back(std::move(row));
    }
    return rows;
}

inline Json real_matrix_to_json(const RealMatrix& m) {
    Json rows = Json::array();
    for (Index i = 0; i < m.rows(); ++i) {
        Json row = Json::array();
        for (Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
        rows.push_back(std::move(row));
    }
    return rows;
}

namespace detail {

inline double number_at(const Json& j, const std::string& path) {
    if (!j.is_number()) throw ParseError(path, "expected a number");
    return j.get<double>();
}

inline const Json& field(const Json& obj, const char* key, const std::string& path) {
    if (!obj.contains(key)) throw ParseError(path, std::string("missing field \"") + key + "\"");
    return obj.at(key);
}

} // namespace detail

inline Matrix matrix_from_json(const Json& j, const std::string& path = "$") {
    if (!j.is_array() || j.empty()) throw ParseError(path, "expected a non-empty array of rows");
    const Index rows = static_cast<Index>(j.size());
    Index cols = -1;
    Matrix m;
    for (Index i = 0; i < rows; ++i) {
        const std::string rp = path + "[" + std::to_string(i) + "]";
        const Json& row = j[static_cast<std::size_t>(i)];
        if (!row.is_array()) throw ParseError(rp, "expected an array of [re, im] pairs");
        if (cols < 0) {
            cols = static_cast<Index>(row.size());
            m.resize(rows, cols);
        } else if (static_cast<Index>(row.size()) != cols) {
            throw ParseError(rp, "row length " + std::to_string(row.size()) + " differs from " +
                                     std::to_string(cols));
        }
        for (Index c = 0; c < cols; ++c) {
            const std::string ep = rp + "[" + std::to_string(c) + "]";
            const Json& e = row[static_cast<std::size_t>(c)];
            if (!e.is_array() || e.size() != 2) throw ParseError(ep, "expected [re, im] pair");
            m(i, c) = Complex(detail::number_at(e[0], ep + "[0]"), detail::number_at(e[1], ep + "[1]"));
        }
    }
    return m;
}

inline RealMatrix real_matrix_from_json(const Json& j, const std::string& path = "$") {
    if (!j.is_array() || j.empty()) throw ParseError(path, "expected a non-empty array of rows");
    const Index rows = static_cast<Index>(j.size());
    RealMatrix m;
    for (Index i = 0; i < rows; ++i) {
        const std::string rp = path + "[" + std::to_string(i) + "]";
        const Json& row = j[static_cast<std::size_t>(i)];
        if (!row.is_array()) throw ParseError(rp, "expected an array of numbers");
        if (i == 0) m.resize(rows, static_cast<Index>(row.size()));
        if (static_cast<Index>(row.size()) != m.cols())
            throw ParseError(rp, "row length differs from the first row");
        for (Index c = 0; c < m.cols(); ++c)
            m(i, c) = detail::number_at(row[static_cast<std::size_t>(c)],
                                        rp + "[" + std::to_string(c) + "]");
    }
    return m;
}

// ---- models ----

inline Json model_to_json(const QuantumModel& m) {
    Json j;
    j["dim"] = m.dim;
    j["kind"] = to_string(m.kind);
    switch (m.kind) {
    case ModelKind::kraus: {
        Json ops = Json::array();
        for (const auto& l : m.kraus) ops.push_back(matrix_to_json(l));
        j["kraus"] = std::move(ops);
        break;
    }
    case ModelKind::lindblad: {
        j["hamiltonian"] = matrix_to_json(m.hamiltonian);
        Json ops = Json::array();
        for (const auto& l : m.lindblad) ops.push_back(matrix_to_json(l));
        j["lindblad"] = std::move(ops);
        break;
    }
    case ModelKind::stochastic:
        j["stochastic"] = real_matrix_to_json(m.stochastic);
        break;
    }
    return j;
}

inline QuantumModel model_from_json(const Json& j) {
    if (!j.is_object()) throw ParseError("$", "expected a model object");
    const Json& dim_j = detail::field(j, "dim", "$");
    if (!dim_j.is_number_integer() || dim_j.get<long long>() <= 0)
        throw ParseError("$.dim", "expected a positive integer");
    const Index dim = static_cast<Index>(dim_j.get<long long>());
    const Json& kind_j = detail::field(j, "kind", "$");
    if (!kind_j.is_string()) throw ParseError("$.kind", "expected a string");
    const std::string kind = kind_j.get<std::string>();

    auto check_dim = [&](const Matrix& x, const std::string& path) {
        if (x.rows() != dim || x.cols() != dim)
            throw ParseError(path, "expected " + std::to_string(dim) + "x" + std::to_string(dim) +
                                       " matrix, got " + std::to_string(x.rows()) + "x" +
                                       std::to_string(x.cols()));
    };
    auto op_list = [&](const char* key, bool required) {
        std::vector<Matrix> ops;
        const std::string path = std::string("$.") + key;
        if (!j.contains(key)) {
            if (required) throw ParseError("$", std::string("missing field \"") + key + "\"");
            return ops;
        }
        const Json& arr = j.at(key);
        if (!arr.is_array()) throw ParseError(path, "expected an array of matrices");
        for (std::size_t k = 0; k < arr.size(); ++k) {
            const std::string p = path + "[" + std::to_string(k) + "]";
            Matrix x = matrix_from_json(arr[k], p);
            check_dim(x, p);
            ops.push_back(std::move(x));
        }
        return ops;
    };

    if (kind == "kraus") {
        auto ops = op_list("kraus", true);
        if (ops.empty()) throw ParseError("$.kraus", "needs at least one operator");
        return make_kraus_model(std::move(ops));
    }
    if (kind == "lindblad") {
        Matrix h = matrix_from_json(detail::field(j, "hamiltonian", "$"), "$.hamiltonian");
        check_dim(h, "$.hamiltonian");
        return make_lindblad_model(std::move(h), op_list("lindblad", false));
    }
    if (kind == "stochastic") {
        RealMatrix p = real_matrix_from_json(detail::field(j, "stochastic", "$"), "$.stochastic");
        if (p.rows() != dim || p.cols() != dim)
            throw ParseError("$.stochastic", "expected " + std::to_string(dim) + "x" +
                                                 std::to_string(dim) + " matrix");
        return make_stochastic_model(std::move(p));
    }
    throw ParseError("$.kind", "unknown kind \"" + kind + "\" (kraus, lindblad, stochastic)");
}

inline Json read_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw StructuralError("cannot open " + path);
    try {
        return Json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError("$", std::string("invalid JSON in ") + path + ": " + e.what());
    }
}

inline QuantumModel load_model(const std::string& path) { return model_from_json(read_json_file(path)); }

// A matrix file is either a bare matrix or an object {"matrix": ...}.
inline Matrix load_matrix(const std::string& path) {
    const Json j = read_json_file(path);
    if (j.is_object()) return matrix_from_json(detail::field(j, "matrix", "$"), "$.matrix");
    return matrix_from_json(j, "$");
}

inline std::string model_hash(const QuantumModel& m) {
    Fnv1a h;
    h.add(model_to_json(m).dump());
    return h.hex();
}

// ---- reports ----

struct Report {
    std::string model_hash;
    std::string command;
    std::uint64_t seed = kDefaultSeed;
    Tolerances tolerances;
    Json payload = Json::object();
    std::map<std::string, double> residuals;
    std::optional<double> timing_ms; // omitted when reports must be byte-reproducible
};

inline Json tolerances_to_json(const Tolerances& t) {
    return Json{{"rank_tol", t.rank_tol}, {"alg_tol", t.alg_tol}, {"conv_tol", t.conv_tol}};
}

// Non-finite numbers have no JSON literal; they are written as strings.
inline Json number_json(double x) {
    if (std::isfinite(x)) return x;
    if (std::isnan(x)) return "nan";
    return x > 0 ? "inf" : "-inf";
}

inline Json report_to_json(const Report& r) {
    Json j;
    j["model_hash"] = r.model_hash;
    j["command"] = r.command;
    j["seed"] = r.seed;
    j["tolerances"] = tolerances_to_json(r.tolerances);
    j["payload"] = r.payload;
    Json res = Json::object();
    for (const auto& [k, v] : r.residuals) res[k] = number_json(v);
    j["residuals"] = std::move(res);
    if (r.timing_ms) j["timing_ms"] = *r.timing_ms;
    return j;
}

// ---- text rendering ----

inline std::string format_number(double x) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.6g", x);
    return buf;
}

inline std::string format_complex(Complex z) {
    if (z.imag() == 0.0) return format_number(z.real());
    std::string s = format_number(z.real());
    s += z.imag() < 0 ? " - " : " + ";
    s += format_number(std::abs(z.imag())) + "i";
    return s;
}

inline std::string format_matrix(const Matrix& m, const std::string& indent = "  ") {
    std::ostringstream out;
    for (Index i = 0; i < m.rows(); ++i) {
        out << indent << "[";
        for (Index j = 0; j < m.cols(); ++j) out << (j ? ", " : "") << format_complex(m(i, j));
        out << "]\n";
    }
    return out.str();
}

namespace detail {

inline bool looks_like_matrix(const Json& j) {
    if (!j.is_array() || j.empty() || !j[0].is_array() || j[0].empty()) return false;
    const Json& e = j[0][0];
    return e.is_array() && e.size() == 2 && e[0].is_number();
}

inline void render(std::ostringstream& out, const Json& j, const std::string& indent) {
    if (looks_like_matrix(j)) {
        out << "\n" << format_matrix(matrix_from_json(j), indent + "  ");
        return;
    }
    if (j.is_object()) {
        out << "\n";
        for (const auto& [k, v] : j.items()) {
            out << indent << k << ":";
            if (v.is_object() || (v.is_array() && !v.empty() && (v[0].is_object() || looks_like_matrix(v[0]) || looks_like_matrix(v)))) {
                render(out, v, indent + "  ");
            } else {
                out << " ";
                render(out, v, indent + "  ");
                out << "\n";
            }
        }
        return;
    }
    if (j.is_array() && !j.empty() && (j[0].is_object() || looks_like_matrix(j[0]))) {
        out << "\n";
        for (std::size_t i = 0; i < j.size(); ++i) {
            out << indent << "[" << i << "]";
            render(out, j[i], indent + "  ");
        }
        return;
    }
    if (j.is_number_float()) {
        out << format_number(j.get<double>());
    } else if (j.is_string()) {
        out << j.get<std::string>();
    } else {
        out << j.dump();
    }
}

} // namespace detail

// Human-readable rendering: matrices with 6 significant digits, nested fields
// indented; JSON stays the machine contract.
inline std::string report_to_text(const Report& r) {
    std::ostringstream out;
    out << "command: " << r.command << "\n";
    out << "model_hash: " << r.model_hash << "\n";
    out << "seed: " << r.seed << "\n";
    out << "tolerances: rank_tol=" << format_number(r.tolerances.rank_tol)
        << " alg_tol=" << format_number(r.tolerances.alg_tol)
        << " conv_tol=" << format_number(r.tolerances.conv_tol) << "\n";
    out << "payload:";
    detail::render(out, r.payload, "  ");
    if (!r.residuals.empty()) {
        out << "residuals:\n";
        for (const auto& [k, v] : r.residuals) out << "  " << k << ": " << format_number(v) << "\n";
    }
    if (r.timing_ms) out << "timing_ms: " << format_number(*r.timing_ms) << "\n";
    return out.str();
}

} // namespace qds
