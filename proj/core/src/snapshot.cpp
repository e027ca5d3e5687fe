#include "eals/error.hpp"
#include "eals/model.hpp"

#include <iomanip>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>

namespace eals {

namespace {

void write_rows(std::ostream& out, const RowMatrix& m) {
    for (std::size_t r = 0; r < m.rows(); ++r) {
        const auto row = m.row(r);
        for (std::size_t c = 0; c < row.size(); ++c) {
            if (c > 0) out << ' ';
            out << row[c];
        }
        out << '\n';
    }
}

void read_rows(std::istream& in, RowMatrix& m, std::size_t& lineno) {
    std::string line;
    for (std::size_t r = 0; r < m.rows(); ++r) {
        if (!std::getline(in, line)) throw ParseError(lineno + 1, "model snapshot truncated");
        ++lineno;
        std::istringstream row(line);
        for (auto& v : m.row(r)) {
            if (!(row >> v)) throw ParseError(lineno, "expected " + std::to_string(m.cols()) + " values");
        }
    }
}

}  // namespace

void write_model_snapshot(std::ostream& out, const FactorModel& model) {
    const auto old_precision = out.precision(17);
    out << model.num_users() << ' ' << model.num_items() << ' ' << model.factors << '\n';
    write_rows(out, model.P);
    write_rows(out, model.Q);
    out.precision(old_precision);
}

FactorModel read_model_snapshot(std::istream& in) {
    std::string line;
    std::size_t lineno = 1;
    if (!std::getline(in, line)) throw ParseError(1, "missing 'M N K' header");
    std::istringstream hdr(line);
    std::size_t m = 0, n = 0, k = 0;
    if (!(hdr >> m >> n >> k) || k == 0) throw ParseError(1, "malformed 'M N K' header");
    FactorModel model;
    model.factors = k;
    model.P = RowMatrix(m, k);
    model.Q = RowMatrix(n, k);
    read_rows(in, model.P, lineno);
    read_rows(in, model.Q, lineno);
    model.Sp = RowMatrix(k, k);
    model.Sq = RowMatrix(k, k);
    return model;
}

}  // namespace eals
