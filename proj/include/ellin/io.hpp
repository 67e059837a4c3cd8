#pragma once

#include <cstddef>
#include <string>
#include <utility>

#include <json.hpp>

#include "ellin/ellipsoid.hpp"
#include "ellin/errors.hpp"
#include "ellin/invariant.hpp"
#include "ellin/matrix.hpp"

// JSON fronting for the command line tool. Structural problems (missing keys,
// wrong types, non-finite numbers, ragged rows) raise ParseError; semantic
// problems (dimension clashes, non-SPD shapes) surface as the library's own
// error types.

namespace ellin::io {

using nlohmann::json;

inline double parse_number(const json& j, const std::string& name) {
    if (!j.is_number())
        throw ParseError("expected a number for " + name);
    const double v = j.get<double>();
    if (!std::isfinite(v)) throw ParseError(name + " must be finite");
    return v;
}

inline Vector parse_vector(const json& j, const std::string& name) {
    if (!j.is_array() || j.empty())
        throw ParseError("expected a nonempty array for " + name);
    Vector v;
    v.reserve(j.size());
    for (std::size_t i = 0; i < j.size(); ++i)
        v.push_back(parse_number(j[i], name + "[" + std::to_string(i) + "]"));
    return v;
}

inline Matrix parse_matrix(const json& j, const std::string& name) {
    if (!j.is_array() || j.empty())
        throw ParseError("expected a nonempty array of rows for " + name);
    const std::size_t rows = j.size();
    if (!j[0].is_array() || j[0].empty())
        throw ParseError("expected nonempty rows in " + name);
    const std::size_t cols = j[0].size();
    Matrix m(rows, cols);
    for (std::size_t i = 0; i < rows; ++i) {
        if (!j[i].is_array() || j[i].size() != cols)
            throw ParseError("ragged rows in " + name);
        for (std::size_t k = 0; k < cols; ++k)
            m(i, k) = parse_number(j[i][k], name + " entry");
    }
    return m;
}

inline const json& require_key(const json& j, const std::string& key) {
    if (!j.is_object() || !j.contains(key))
        throw ParseError("missing key: " + key);
    return j.at(key);
}

inline Ellipsoid parse_ellipsoid(const json& j, const std::string& name) {
    if (!j.is_object()) throw ParseError("expected an object for " + name);
    Vector c = parse_vector(require_key(j, "center"), name + ".center");
    Matrix s = parse_matrix(require_key(j, "shape"), name + ".shape");
    return Ellipsoid(std::move(c), SymMatrix(std::move(s)));
}

inline DisturbedSystem parse_system(const json& j) {
    DisturbedSystem sys{parse_matrix(require_key(j, "A"), "A"),
                        parse_matrix(require_key(j, "B"), "B"),
                        parse_matrix(require_key(j, "H"), "H"),
                        SymMatrix(parse_matrix(require_key(j, "P"), "P")),
                        parse_matrix(require_key(j, "K"), "K"),
                        {}};
    const json& verts = require_key(j, "disturbance_vertices");
    if (!verts.is_array() || verts.empty())
        throw ParseError("disturbance_vertices must be a nonempty array");
    for (std::size_t i = 0; i < verts.size(); ++i)
        sys.disturbance_vertices.push_back(
            parse_vector(verts[i], "disturbance_vertices[" + std::to_string(i) + "]"));
    return sys;
}

inline json vector_json(const Vector& v) {
    json a = json::array();
    for (double x : v) a.push_back(x);
    return a;
}

inline json matrix_json(const Matrix& m) {
    json rows = json::array();
    for (std::size_t i = 0; i < m.rows(); ++i) {
        json r = json::array();
        for (std::size_t j = 0; j < m.cols(); ++j) r.push_back(m(i, j));
        rows.push_back(r);
    }
    return rows;
}

inline json ellipsoid_json(const Ellipsoid& e) {
    return json{{"center", vector_json(e.center)}, {"shape", matrix_json(e.shape.entries())}};
}

}  // namespace ellin::io
