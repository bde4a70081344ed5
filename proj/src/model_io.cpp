#include "riskbudget/model_io.hpp"

#include "riskbudget/csv.hpp"
#include "riskbudget/errors.hpp"

#include <json.hpp>

#include <fstream>
#include <sstream>

namespace riskbudget {
namespace {

using nlohmann::json;

std::string line_col(const std::string& text, std::size_t byte) {
    long line = 1;
    long col = 1;
    for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
        if (text[i] == '\n') {
            ++line;
            col = 1;
        } else {
            ++col;
        }
    }
    return std::to_string(line) + ":" + std::to_string(col);
}

const json& field(const json& j, const char* key, const std::string& source) {
    if (!j.contains(key)) {
        throw InputError(source + ": missing field '" + key + "'");
    }
    return j.at(key);
}

double number(const json& j, const std::string& where) {
    if (!j.is_number()) {
        throw InputError(where + ": expected a number");
    }
    return j.get<double>();
}

std::vector<double> numbers(const json& j, const std::string& where) {
    if (!j.is_array()) {
        throw InputError(where + ": expected an array of numbers");
    }
    std::vector<double> out;
    for (std::size_t i = 0; i < j.size(); ++i) {
        out.push_back(number(j[i], where + "[" + std::to_string(i) + "]"));
    }
    return out;
}

Vector vector_of(const json& j, const std::string& where) {
    const auto v = numbers(j, where);
    return Eigen::Map<const Vector>(v.data(), static_cast<Eigen::Index>(v.size()));
}

Matrix matrix_of(const json& j, const std::string& where) {
    if (!j.is_array() || j.empty()) {
        throw InputError(where + ": expected a non-empty array of rows");
    }
    const auto rows = static_cast<Eigen::Index>(j.size());
    Matrix m(rows, rows);
    for (Eigen::Index r = 0; r < rows; ++r) {
        const auto row = numbers(j[static_cast<std::size_t>(r)], where + "[" + std::to_string(r) + "]");
        if (static_cast<Eigen::Index>(row.size()) != rows) {
            throw InputError(where + ": matrix must be square");
        }
        for (Eigen::Index c = 0; c < rows; ++c) {
            m(r, c) = row[static_cast<std::size_t>(c)];
        }
    }
    return m;
}

json vector_json(const Vector& v) {
    json a = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        a.push_back(v[i]);
    }
    return a;
}

json matrix_json(const Matrix& m) {
    json a = json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        a.push_back(vector_json(m.row(r).transpose()));
    }
    return a;
}

}  // namespace

std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw InputError("cannot open '" + path + "'");
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

ReturnModel parse_model_json(const std::string& text, const std::string& source) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw InputError(source + ":" + line_col(text, e.byte > 0 ? e.byte - 1 : 0) +
                         ": JSON parse error: " + e.what());
    }
    if (!j.is_object()) {
        throw InputError(source + ": expected a JSON object");
    }
    const json& type = field(j, "type", source);
    if (!type.is_string()) {
        throw InputError(source + ": 'type' must be a string");
    }
    const auto p = numbers(field(j, "p", source), source + ": p");
    const json& mu = field(j, "mu", source);
    const json& scale = field(j, "scale", source);
    if (!mu.is_array() || !scale.is_array() || mu.size() != p.size() || scale.size() != p.size()) {
        throw InputError(source + ": p, mu and scale must have one entry per component");
    }
    const std::string t = type.get<std::string>();
    if (t == "tmix") {
        const auto nu = numbers(field(j, "nu", source), source + ": nu");
        if (nu.size() != p.size()) {
            throw InputError(source + ": nu must have one entry per component");
        }
        std::vector<StudentTMixture::Component> comps;
        for (std::size_t k = 0; k < p.size(); ++k) {
            const std::string at = source + ": component " + std::to_string(k);
            comps.push_back({p[k], vector_of(mu[k], at + " mu"), matrix_of(scale[k], at + " scale"), nu[k]});
        }
        try {
            return StudentTMixture(std::move(comps));
        } catch (const InputError& e) {
            throw InputError(source + ": " + e.what());
        }
    }
    if (t == "gmix") {
        std::vector<GaussianMixture::Component> comps;
        for (std::size_t k = 0; k < p.size(); ++k) {
            const std::string at = source + ": component " + std::to_string(k);
            comps.push_back({p[k], vector_of(mu[k], at + " mu"), matrix_of(scale[k], at + " scale")});
        }
        try {
            return GaussianMixture(std::move(comps));
        } catch (const InputError& e) {
            throw InputError(source + ": " + e.what());
        }
    }
    throw InputError(source + ": unknown model type '" + t + "' (expected tmix or gmix)");
}

ReturnModel read_model_file(const std::string& path) {
    return parse_model_json(read_text_file(path), path);
}

std::string model_to_json(const ReturnModel& model) {
    json j;
    json p = json::array();
    json mu = json::array();
    json scale = json::array();
    if (const auto* t = std::get_if<StudentTMixture>(&model)) {
        j["type"] = "tmix";
        json nu = json::array();
        for (const auto& c : t->components()) {
            p.push_back(c.weight);
            mu.push_back(vector_json(c.location));
            scale.push_back(matrix_json(c.scale));
            nu.push_back(c.nu);
        }
        j["nu"] = nu;
    } else {
        j["type"] = "gmix";
        for (const auto& c : std::get<GaussianMixture>(model).components()) {
            p.push_back(c.weight);
            mu.push_back(vector_json(c.location));
            scale.push_back(matrix_json(c.covariance));
        }
    }
    j["p"] = p;
    j["mu"] = mu;
    j["scale"] = scale;
    return j.dump(2) + "\n";
}

void write_model_file(const std::string& path, const ReturnModel& model) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw InputError("cannot write '" + path + "'");
    }
    out << model_to_json(model);
}

ReturnSample read_sample_csv(std::istream& is, const std::string& source) {
    CsvTable raw = read_csv(is, false);
    if (raw.rows.empty()) {
        throw InputError(source + ": no data rows");
    }
    std::size_t first = 0;
    try {
        parse_double(raw.rows[0][0]);
    } catch (const InputError&) {
        first = 1;  // header
    }
    const auto n = static_cast<Eigen::Index>(raw.rows.size() - first);
    const auto d = static_cast<Eigen::Index>(raw.rows[0].size());
    if (n < 1) {
        throw InputError(source + ": no data rows");
    }
    RowMatrix X(n, d);
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto& row = raw.rows[static_cast<std::size_t>(i) + first];
        for (Eigen::Index j = 0; j < d; ++j) {
            try {
                X(i, j) = parse_double(row[static_cast<std::size_t>(j)]);
            } catch (const InputError& e) {
                throw InputError(source + ": row " + std::to_string(i + 1 + static_cast<Eigen::Index>(first)) +
                                 ", column " + std::to_string(j + 1) + ": " + e.what());
            }
        }
    }
    try {
        return ReturnSample(std::move(X));
    } catch (const InputError& e) {
        throw InputError(source + ": " + e.what());
    }
}

ReturnSample read_sample_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw InputError("cannot open '" + path + "'");
    }
    return read_sample_csv(in, path);
}

void write_sample_csv(std::ostream& os, const ReturnSample& sample, bool header) {
    const RowMatrix& X = sample.data();
    std::vector<std::string> fields(static_cast<std::size_t>(X.cols()));
    if (header) {
        for (Eigen::Index j = 0; j < X.cols(); ++j) {
            fields[static_cast<std::size_t>(j)] = "asset_" + std::to_string(j + 1);
        }
        write_csv_row(os, fields);
    }
    for (Eigen::Index i = 0; i < X.rows(); ++i) {
        for (Eigen::Index j = 0; j < X.cols(); ++j) {
            fields[static_cast<std::size_t>(j)] = format_double(X(i, j));
        }
        write_csv_row(os, fields);
    }
}

}  // namespace riskbudget
