#include "puffer/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "puffer/errors.hpp"

namespace puffer::io {

namespace {

// Parses one CSV record (handles quoted fields and escaped quotes). Returns
// false at end of input.
bool next_record(std::istream& in, std::vector<std::string>& fields) {
    fields.clear();
    std::string field;
    bool in_quotes = false;
    bool any = false;
    int c;
    while ((c = in.get()) != EOF) {
        any = true;
        if (in_quotes) {
            if (c == '"') {
                if (in.peek() == '"') {
                    field.push_back('"');
                    in.get();
                } else {
                    in_quotes = false;
                }
            } else {
                field.push_back(static_cast<char>(c));
            }
        } else if (c == '"') {
            in_quotes = true;
        } else if (c == ',') {
            fields.push_back(std::move(field));
            field.clear();
        } else if (c == '\n') {
            break;
        } else if (c == '\r') {
            if (in.peek() == '\n') in.get();
            break;
        } else {
            field.push_back(static_cast<char>(c));
        }
    }
    if (!any) return false;
    fields.push_back(std::move(field));
    return true;
}

double parse_cell(const std::string& cell, const std::string& path, long row, long col) {
    if (cell.empty()) throw ParseError(path, row, col, "empty cell");
    const char* begin = cell.c_str();
    char* end = nullptr;
    const double v = std::strtod(begin, &end);
    while (end && *end == ' ') ++end;
    if (end == begin || (end && *end != '\0'))
        throw ParseError(path, row, col, "cannot parse '" + cell + "' as a number");
    if (!std::isfinite(v)) throw ParseError(path, row, col, "non-finite value '" + cell + "'");
    return v;
}

}  // namespace

Dataset read_csv(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open file: " + path);

    Dataset ds;
    std::vector<std::string> fields;
    if (!next_record(in, fields) || fields.empty() || (fields.size() == 1 && fields[0].empty()))
        throw ParseError(path, 1, 1, "missing header row");
    ds.header = fields;

    std::vector<std::vector<double>> rows;
    long row_num = 1;
    while (next_record(in, fields)) {
        ++row_num;
        if (fields.size() == 1 && fields[0].empty()) continue;  // trailing blank line
        if (fields.size() != ds.header.size())
            throw ParseError(path, row_num, 1,
                             "expected " + std::to_string(ds.header.size()) + " fields, got " +
                                 std::to_string(fields.size()));
        std::vector<double> row(fields.size());
        for (std::size_t c = 0; c < fields.size(); ++c)
            row[c] = parse_cell(fields[c], path, row_num, static_cast<long>(c) + 1);
        rows.push_back(std::move(row));
    }
    if (rows.empty()) throw ParseError(path, 2, 1, "no data rows");

    ds.values.resize(static_cast<Eigen::Index>(rows.size()),
                     static_cast<Eigen::Index>(ds.header.size()));
    for (std::size_t r = 0; r < rows.size(); ++r)
        for (std::size_t c = 0; c < rows[r].size(); ++c)
            ds.values(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = rows[r][c];
    return ds;
}

RegressionProblem load_csv(const std::string& path, const std::string& y_column) {
    const Dataset ds = read_csv(path);

    Eigen::Index y_idx = -1;
    for (std::size_t c = 0; c < ds.header.size(); ++c) {
        if (ds.header[c] == y_column) {
            y_idx = static_cast<Eigen::Index>(c);
            break;
        }
    }
    if (y_idx < 0) {
        // Fall back to a 1-based column index.
        char* end = nullptr;
        const long idx = std::strtol(y_column.c_str(), &end, 10);
        if (end != y_column.c_str() && *end == '\0' && idx >= 1 &&
            idx <= static_cast<long>(ds.header.size())) {
            y_idx = static_cast<Eigen::Index>(idx - 1);
        } else {
            throw MissingColumn("no column named '" + y_column + "' in " + path);
        }
    }

    RegressionProblem problem;
    problem.Y = ds.values.col(y_idx);
    problem.X.resize(ds.values.rows(), ds.values.cols() - 1);
    Eigen::Index out = 0;
    for (Eigen::Index c = 0; c < ds.values.cols(); ++c)
        if (c != y_idx) problem.X.col(out++) = ds.values.col(c);
    problem.validate();
    return problem;
}

std::string format_double(double value) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", value);
    return buf;
}

void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot open file for writing: " + path);
    out << content;
    if (!out) throw DataError("write failed: " + path);
}

std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_dataset_csv(const std::string& path, const std::vector<std::string>& header,
                       const Eigen::MatrixXd& values) {
    if (static_cast<Eigen::Index>(header.size()) != values.cols())
        throw DimensionMismatch("write_dataset_csv: header length does not match columns");
    std::ostringstream out;
    for (std::size_t c = 0; c < header.size(); ++c) {
        if (c) out << ',';
        out << header[c];
    }
    out << '\n';
    for (Eigen::Index r = 0; r < values.rows(); ++r) {
        for (Eigen::Index c = 0; c < values.cols(); ++c) {
            if (c) out << ',';
            out << format_double(values(r, c));
        }
        out << '\n';
    }
    write_text_file(path, out.str());
}

void write_problem_csv(const std::string& path, const Eigen::MatrixXd& X,
                       const Eigen::VectorXd& Y) {
    if (X.rows() != Y.size()) throw DimensionMismatch("write_problem_csv: X rows != Y length");
    std::vector<std::string> header;
    header.reserve(static_cast<std::size_t>(X.cols()) + 1);
    header.push_back("y");
    for (Eigen::Index c = 0; c < X.cols(); ++c) header.push_back("x" + std::to_string(c + 1));
    Eigen::MatrixXd values(X.rows(), X.cols() + 1);
    values.col(0) = Y;
    values.rightCols(X.cols()) = X;
    write_dataset_csv(path, header, values);
}

void write_matrix_csv(const std::string& path, const Eigen::MatrixXd& X) {
    std::vector<std::string> header;
    header.reserve(static_cast<std::size_t>(X.cols()));
    for (Eigen::Index c = 0; c < X.cols(); ++c) header.push_back("x" + std::to_string(c + 1));
    write_dataset_csv(path, header, X);
}

std::string result_to_csv(const experiments::ExperimentResult& result) {
    std::set<std::string> metric_names;
    for (const auto& row : result.rows)
        for (const auto& [name, _] : row.metrics) metric_names.insert(name);

    std::ostringstream out;
    out << "study,method,p,rho,q,replicate,aggregate";
    for (const auto& name : metric_names) out << ',' << name;
    out << '\n';
    for (const auto& row : result.rows) {
        out << row.study << ',' << row.method << ',' << row.p << ',' << format_double(row.rho)
            << ',' << row.q << ',' << row.replicate << ',' << (row.aggregate ? 1 : 0);
        for (const auto& name : metric_names) {
            out << ',';
            const auto it = row.metrics.find(name);
            if (it != row.metrics.end()) out << format_double(it->second);
        }
        out << '\n';
    }
    return out.str();
}

experiments::ExperimentConfig parse_experiment_config(const Json& j) {
    static const std::set<std::string> known = {
        "study",       "n",        "p_grid",          "rho_grid",
        "s",           "beta_magnitude", "sigma2",    "replicates",
        "methods",     "master_seed",    "grid_size", "lambda_min_ratio",
        "df_max",      "first_df_k",     "num_pairs", "q_max",
        "ic_gamma",    "coherence_pairs", "max_failure_fraction"};
    if (!j.is_object()) throw DataError("experiment config must be a JSON object");
    for (const auto& [key, _] : j.items())
        if (!known.count(key)) throw DataError("unknown key in experiment config: '" + key + "'");

    experiments::ExperimentConfig cfg;
    if (!j.contains("study")) throw DataError("experiment config: missing 'study'");
    cfg.study = experiments::study_from_name(j.at("study").get<std::string>());

    if (j.contains("n")) cfg.n = j.at("n").get<Eigen::Index>();
    if (j.contains("p_grid")) cfg.p_grid = j.at("p_grid").get<std::vector<Eigen::Index>>();
    if (j.contains("rho_grid")) cfg.rho_grid = j.at("rho_grid").get<std::vector<double>>();
    if (j.contains("s")) cfg.s = j.at("s").get<Eigen::Index>();
    if (j.contains("beta_magnitude")) cfg.beta_magnitude = j.at("beta_magnitude").get<double>();
    if (j.contains("sigma2")) cfg.sigma2 = j.at("sigma2").get<double>();
    if (j.contains("replicates")) cfg.replicates = j.at("replicates").get<int>();
    if (j.contains("methods")) {
        cfg.methods.clear();
        for (const auto& m : j.at("methods"))
            cfg.methods.push_back(experiments::method_from_name(m.get<std::string>()));
    }
    if (j.contains("master_seed")) cfg.master_seed = j.at("master_seed").get<std::uint64_t>();
    if (j.contains("grid_size")) cfg.grid_size = j.at("grid_size").get<int>();
    if (j.contains("lambda_min_ratio"))
        cfg.lambda_min_ratio = j.at("lambda_min_ratio").get<double>();
    if (j.contains("df_max")) cfg.df_max = j.at("df_max").get<int>();
    if (j.contains("first_df_k")) cfg.first_df_k = j.at("first_df_k").get<int>();
    if (j.contains("num_pairs")) cfg.num_pairs = j.at("num_pairs").get<Eigen::Index>();
    if (j.contains("q_max")) cfg.q_max = j.at("q_max").get<int>();
    if (j.contains("ic_gamma")) cfg.ic_gamma = j.at("ic_gamma").get<double>();
    if (j.contains("coherence_pairs"))
        cfg.coherence_pairs = j.at("coherence_pairs").get<Eigen::Index>();
    if (j.contains("max_failure_fraction"))
        cfg.max_failure_fraction = j.at("max_failure_fraction").get<double>();
    cfg.validate();
    return cfg;
}

experiments::ExperimentConfig load_experiment_config(const std::string& path) {
    Json j;
    try {
        j = Json::parse(read_text_file(path));
    } catch (const nlohmann::json::parse_error& e) {
        throw DataError("cannot parse JSON config " + path + ": " + e.what());
    }
    return parse_experiment_config(j);
}

Json experiment_config_to_json(const experiments::ExperimentConfig& config) {
    Json j;
    j["study"] = experiments::study_name(config.study);
    j["n"] = config.n;
    j["p_grid"] = config.p_grid;
    j["rho_grid"] = config.rho_grid;
    j["s"] = config.s;
    j["beta_magnitude"] = config.beta_magnitude;
    j["sigma2"] = config.sigma2;
    j["replicates"] = config.replicates;
    Json methods = Json::array();
    for (const auto m : config.methods) methods.push_back(experiments::method_name(m));
    j["methods"] = methods;
    j["master_seed"] = config.master_seed;
    j["grid_size"] = config.grid_size;
    j["lambda_min_ratio"] = config.lambda_min_ratio;
    j["df_max"] = config.df_max;
    j["first_df_k"] = config.first_df_k;
    j["num_pairs"] = config.num_pairs;
    j["q_max"] = config.q_max;
    j["ic_gamma"] = config.ic_gamma;
    j["coherence_pairs"] = config.coherence_pairs;
    j["max_failure_fraction"] = config.max_failure_fraction;
    return j;
}

}  // namespace puffer::io
