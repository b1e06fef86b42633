#include "anchorda/matrix.hpp"

#include <algorithm>

#include "anchorda/error.hpp"

namespace anchorda {

Matrix Matrix::from_rows(const std::vector<std::vector<double>>& rows) {
    if (rows.empty()) return {};
    Matrix m(rows.size(), rows.front().size());
    for (std::size_t r = 0; r < rows.size(); ++r) {
        if (rows[r].size() != m.cols())
            fail(ErrorKind::ShapeMismatch, "row " + std::to_string(r) + " has length " +
                                               std::to_string(rows[r].size()) + ", expected " +
                                               std::to_string(m.cols()));
        std::copy(rows[r].begin(), rows[r].end(), m.row(r).begin());
    }
    return m;
}

double squared_distance(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size())
        fail(ErrorKind::ShapeMismatch, "vector lengths " + std::to_string(a.size()) + " and " +
                                           std::to_string(b.size()) + " differ");
    double sum = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        sum += d * d;
    }
    return sum;
}

}  // namespace anchorda
