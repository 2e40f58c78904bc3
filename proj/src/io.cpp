#include "ssreg/io.hpp"

#include <array>
#include <charconv>
#include <fstream>
#include <sstream>
#include <vector>

namespace ssreg {

std::string format_double(double value) {
    std::array<char, 64> buf{};
    const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), value);
    return std::string(buf.data(), res.ptr);
}

std::string matrix_to_csv_rows(const Matrix& M) {
    std::string out;
    for (Eigen::Index i = 0; i < M.rows(); ++i) {
        for (Eigen::Index j = 0; j < M.cols(); ++j) {
            if (j > 0) {
                out += ',';
            }
            out += format_double(M(i, j));
        }
        out += '\n';
    }
    return out;
}

nlohmann::json matrix_to_json(const Matrix& M) {
    nlohmann::json rows = nlohmann::json::array();
    for (Eigen::Index i = 0; i < M.rows(); ++i) {
        nlohmann::json row = nlohmann::json::array();
        for (Eigen::Index j = 0; j < M.cols(); ++j) {
            row.push_back(M(i, j));
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

Matrix matrix_from_json(const nlohmann::json& j) {
    if (!j.is_array() || j.empty()) {
        throw ConfigError("matrix must be a non-empty array of rows");
    }
    const auto rows = static_cast<Eigen::Index>(j.size());
    if (!j[0].is_array() || j[0].empty()) {
        throw ConfigError("matrix rows must be non-empty arrays");
    }
    const auto cols = static_cast<Eigen::Index>(j[0].size());
    Matrix M(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i) {
        const auto& row = j[static_cast<std::size_t>(i)];
        if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != cols) {
            throw ConfigError("matrix rows must all have the same length");
        }
        for (Eigen::Index c = 0; c < cols; ++c) {
            const auto& v = row[static_cast<std::size_t>(c)];
            if (!v.is_number()) {
                throw ConfigError("matrix entries must be numbers");
            }
            M(i, c) = v.get<double>();
        }
    }
    return M;
}

nlohmann::json system_to_json(const LtiSystem& sys) {
    return {
        {"n", sys.n()},
        {"m", sys.m()},
        {"p", sys.p()},
        {"r", sys.r()},
        {"A", matrix_to_json(sys.A())},
        {"B", matrix_to_json(sys.B())},
        {"C", matrix_to_json(sys.C())},
        {"E", matrix_to_json(sys.E())},
    };
}

LtiSystem system_from_json(const nlohmann::json& j) {
    for (const char* key : {"n", "m", "p", "r", "A", "B", "C", "E"}) {
        if (!j.contains(key)) {
            throw ConfigError(std::string("system document is missing field '") + key + "'");
        }
    }
    Matrix A = matrix_from_json(j.at("A"));
    Matrix B = matrix_from_json(j.at("B"));
    Matrix C = matrix_from_json(j.at("C"));
    Matrix E = matrix_from_json(j.at("E"));
    const auto n = j.at("n").get<Eigen::Index>();
    const auto m = j.at("m").get<Eigen::Index>();
    const auto p = j.at("p").get<Eigen::Index>();
    const auto r = j.at("r").get<Eigen::Index>();
    if (A.rows() != n || B.cols() != m || C.rows() != p || E.cols() != r) {
        throw ConfigError("system document: dimension fields disagree with matrix shapes");
    }
    try {
        return LtiSystem(std::move(A), std::move(B), std::move(C), std::move(E));
    } catch (const ContractViolation& e) {
        throw ConfigError(std::string("system document: ") + e.what());
    }
}

std::string trajectory_to_csv(const Trajectory& traj) {
    traj.validate();
    const Eigen::Index rows = traj.outputs.cols();
    std::string out = "k";
    auto header = [&out](char prefix, Eigen::Index count) {
        for (Eigen::Index i = 0; i < count; ++i) {
            out += ',';
            out += prefix;
            out += '_';
            out += std::to_string(i);
        }
    };
    header('u', traj.inputs.rows());
    if (traj.states) {
        header('x', traj.states->rows());
    }
    header('y', traj.outputs.rows());
    if (traj.disturbances) {
        header('w', traj.disturbances->rows());
    }
    out += '\n';

    auto cells = [&out](const Signal& s, Eigen::Index k) {
        for (Eigen::Index i = 0; i < s.rows(); ++i) {
            out += ',';
            if (k < s.cols()) {
                out += format_double(s(i, k));
            }
        }
    };
    for (Eigen::Index k = 0; k < rows; ++k) {
        out += std::to_string(k);
        cells(traj.inputs, k);
        if (traj.states) {
            cells(*traj.states, k);
        }
        cells(traj.outputs, k);
        if (traj.disturbances) {
            cells(*traj.disturbances, k);
        }
        out += '\n';
    }
    return out;
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream is(line);
    while (std::getline(is, cell, ',')) {
        cells.push_back(cell);
    }
    if (!line.empty() && line.back() == ',') {
        cells.emplace_back();
    }
    return cells;
}

// Column index range [first, first+count) of one block in the header.
struct Block {
    std::size_t first = 0;
    Eigen::Index count = 0;
};

Signal read_block(const std::vector<std::vector<std::string>>& rows, const Block& b, const char* name) {
    Eigen::Index length = 0;
    for (const auto& row : rows) {
        if (row.size() <= b.first || row[b.first].empty()) {
            break;
        }
        ++length;
    }
    Signal s(b.count, length);
    for (Eigen::Index k = 0; k < length; ++k) {
        const auto& row = rows[static_cast<std::size_t>(k)];
        for (Eigen::Index i = 0; i < b.count; ++i) {
            const std::size_t col = b.first + static_cast<std::size_t>(i);
            if (col >= row.size() || row[col].empty()) {
                throw ConfigError(std::string("trajectory CSV: ragged ") + name + " block at row " + std::to_string(k));
            }
            try {
                s(i, k) = std::stod(row[col]);
            } catch (const std::exception&) {
                throw ConfigError("trajectory CSV: bad number '" + row[col] + "'");
            }
        }
    }
    for (std::size_t k = static_cast<std::size_t>(length); k < rows.size(); ++k) {
        for (Eigen::Index i = 0; i < b.count; ++i) {
            const std::size_t col = b.first + static_cast<std::size_t>(i);
            if (col < rows[k].size() && !rows[k][col].empty()) {
                throw ConfigError(std::string("trajectory CSV: ") + name + " samples must be contiguous");
            }
        }
    }
    return s;
}

}  // namespace

Trajectory trajectory_from_csv(const std::string& text) {
    std::istringstream is(text);
    std::string line;
    if (!std::getline(is, line)) {
        throw ConfigError("trajectory CSV: empty document");
    }
    const auto header = split_csv_line(line);
    if (header.empty() || header[0] != "k") {
        throw ConfigError("trajectory CSV: header must start with 'k'");
    }
    Block blocks[4];  // u, x, y, w
    const std::string prefixes = "uxyw";
    for (std::size_t c = 1; c < header.size(); ++c) {
        const std::string& h = header[c];
        const auto pos = h.size() >= 3 && h[1] == '_' ? prefixes.find(h[0]) : std::string::npos;
        if (pos == std::string::npos) {
            throw ConfigError("trajectory CSV: unknown column '" + h + "'");
        }
        Block& b = blocks[pos];
        if (b.count == 0) {
            b.first = c;
        }
        if (h.substr(2) != std::to_string(b.count) || b.first + static_cast<std::size_t>(b.count) != c) {
            throw ConfigError("trajectory CSV: columns out of order at '" + h + "'");
        }
        ++b.count;
    }
    if (blocks[0].count == 0 || blocks[2].count == 0) {
        throw ConfigError("trajectory CSV: input and output blocks are required");
    }

    std::vector<std::vector<std::string>> rows;
    while (std::getline(is, line)) {
        if (line.empty()) {
            continue;
        }
        auto cells = split_csv_line(line);
        if (cells.size() != header.size()) {
            throw ConfigError("trajectory CSV: row " + std::to_string(rows.size()) + " has the wrong number of cells");
        }
        rows.push_back(std::move(cells));
    }

    Trajectory traj;
    traj.inputs = read_block(rows, blocks[0], "input");
    traj.outputs = read_block(rows, blocks[2], "output");
    if (blocks[1].count > 0) {
        traj.states = read_block(rows, blocks[1], "state");
    }
    if (blocks[3].count > 0) {
        traj.disturbances = read_block(rows, blocks[3], "disturbance");
    }
    try {
        traj.validate();
    } catch (const ContractViolation& e) {
        throw ConfigError(std::string("trajectory CSV: ") + e.what());
    }
    return traj;
}

std::string read_text_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw ConfigError("cannot open '" + path.string() + "'");
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
    if (path.has_parent_path()) {
        std::filesystem::create_directories(path.parent_path());
    }
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw ConfigError("cannot write '" + path.string() + "'");
    }
    out << text;
}

}  // namespace ssreg
