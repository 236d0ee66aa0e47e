// Fixture loading and small matrix helpers shared by the test files.
#pragma once

#include "qds/qds.hpp"

#include <initializer_list>
#include <string>

namespace qds::testing {

inline std::string fixture_path(const std::string& name) {
    return std::string(QDS_FIXTURE_DIR) + "/" + name;
}

inline QuantumModel fixture(const std::string& name) { return load_model(fixture_path(name)); }

inline Matrix diag(std::initializer_list<double> values) {
    const Index d = static_cast<Index>(values.size());
    Matrix m = Matrix::Zero(d, d);
    Index i = 0;
    for (double v : values) {
        m(i, i) = v;
        ++i;
    }
    return m;
}

inline Projection diag_projection(std::initializer_list<double> values) {
    return Projection::from_matrix(diag(values));
}

} // namespace qds::testing
