#include "coglasso/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "coglasso/util.hpp"

namespace coglasso {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string provenance_line(const Provenance& prov) {
    return "# coglasso seed=" + std::to_string(prov.seed) + " config_hash=" + prov.config_hash +
           " version=" + prov.version;
}

json provenance_json(const Provenance& prov) {
    return json{{"seed", prov.seed}, {"config_hash", prov.config_hash},
                {"version", prov.version}};
}

Provenance provenance_from_json(const json& j) {
    Provenance prov;
    prov.seed = j.at("seed").get<std::uint64_t>();
    prov.config_hash = j.at("config_hash").get<std::string>();
    prov.version = j.at("version").get<std::string>();
    return prov;
}

void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot open '" + path + "' for writing");
    out << content;
    if (!out) throw DataError("failed writing '" + path + "'");
}

std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open '" + path + "'");
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

std::string trim(const std::string& s) {
    std::size_t a = 0;
    std::size_t b = s.size();
    while (a < b && (s[a] == ' ' || s[a] == '\t' || s[a] == '\r')) ++a;
    while (b > a && (s[b - 1] == ' ' || s[b - 1] == '\t' || s[b - 1] == '\r')) --b;
    return s.substr(a, b - a);
}

std::vector<std::string> split_cells(const std::string& line, char delim) {
    std::vector<std::string> cells;
    std::size_t start = 0;
    for (std::size_t i = 0; i <= line.size(); ++i) {
        if (i == line.size() || line[i] == delim) {
            cells.push_back(trim(line.substr(start, i - start)));
            start = i + 1;
        }
    }
    return cells;
}

struct ParsedTable {
    std::vector<std::string> labels;  // empty when the file had no header
    Matrix data;
};

ParsedTable parse_table(const std::string& path, char delimiter, bool header) {
    const std::string text = read_text_file(path);

    std::vector<std::pair<std::size_t, std::string>> lines;  // (1-based line number, content)
    std::size_t line_no = 0;
    std::size_t start = 0;
    for (std::size_t i = 0; i <= text.size(); ++i) {
        if (i == text.size() || text[i] == '\n') {
            ++line_no;
            std::string line = text.substr(start, i - start);
            start = i + 1;
            const std::string t = trim(line);
            if (t.empty() || t[0] == '#') continue;
            lines.emplace_back(line_no, std::move(line));
        }
    }
    if (lines.empty()) throw DataError("'" + path + "' contains no data rows");

    char delim = delimiter;
    if (delim == '\0')
        delim = lines.front().second.find('\t') != std::string::npos ? '\t' : ',';

    ParsedTable table;
    std::size_t first_row = 0;
    if (header) {
        table.labels = split_cells(lines.front().second, delim);
        first_row = 1;
        if (lines.size() == 1) throw DataError("'" + path + "' has a header but no data rows");
    }

    const std::size_t rows = lines.size() - first_row;
    std::size_t cols = 0;
    std::vector<std::vector<double>> values(rows);
    for (std::size_t r = 0; r < rows; ++r) {
        const auto& [num, line] = lines[r + first_row];
        const auto cells = split_cells(line, delim);
        if (r == 0) {
            cols = cells.size();
            if (header && table.labels.size() != cols)
                throw DataError("'" + path + "' line " + std::to_string(num) + ": " +
                                std::to_string(cells.size()) + " cells but the header has " +
                                std::to_string(table.labels.size()));
        } else if (cells.size() != cols) {
            throw DataError("'" + path + "' line " + std::to_string(num) + ": " +
                            std::to_string(cells.size()) + " cells, expected " +
                            std::to_string(cols));
        }
        values[r].resize(cols);
        for (std::size_t c = 0; c < cols; ++c) {
            const std::string& cell = cells[c];
            double v = 0.0;
            const auto res = std::from_chars(cell.data(), cell.data() + cell.size(), v);
            if (res.ec != std::errc() || res.ptr != cell.data() + cell.size())
                throw DataError("'" + path + "' line " + std::to_string(num) + ", column " +
                                std::to_string(c + 1) + ": cannot parse '" + cell +
                                "' as a number");
            values[r][c] = v;
        }
    }
    if (cols == 0) throw DataError("'" + path + "' has no columns");

    table.data.resize(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
    for (std::size_t r = 0; r < rows; ++r)
        for (std::size_t c = 0; c < cols; ++c)
            table.data(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = values[r][c];
    return table;
}

std::vector<std::string> synth_labels(const char* prefix, std::size_t count) {
    std::vector<std::string> labels(count);
    for (std::size_t i = 0; i < count; ++i) labels[i] = prefix + std::to_string(i + 1);
    return labels;
}

void standardize_columns(Matrix& data, const std::vector<std::string>& labels) {
    const auto n = data.rows();
    for (Eigen::Index j = 0; j < data.cols(); ++j) {
        const double mean = data.col(j).mean();
        data.col(j).array() -= mean;
        const double var = data.col(j).squaredNorm() / static_cast<double>(n);
        if (var <= 0.0)
            throw DataError("column '" + labels[static_cast<std::size_t>(j)] +
                            "' (index " + std::to_string(j) + ") is constant; cannot standardize");
        data.col(j) /= std::sqrt(var);
    }
}

std::string xml_escape(const std::string& s) {
    std::string out;
    out.reserve(s.size());
    for (char ch : s) {
        switch (ch) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            default: out += ch;
        }
    }
    return out;
}

const char* layer_tag(int layer) { return layer == 0 ? "X" : "Z"; }

}  // namespace

Dataset load_dataset(const DatasetSpec& spec) {
    if (spec.path.empty()) throw ParameterError("dataset path is empty");

    Dataset out{Matrix{}, LayerPartition{1, 1}, {}};
    if (!spec.path_z.empty()) {
        ParsedTable x = parse_table(spec.path, spec.delimiter, spec.header);
        ParsedTable z = parse_table(spec.path_z, spec.delimiter, spec.header);
        if (x.data.rows() != z.data.rows())
            throw DataError("sample counts differ: '" + spec.path + "' has " +
                            std::to_string(x.data.rows()) + " rows, '" + spec.path_z + "' has " +
                            std::to_string(z.data.rows()));
        const auto p_x = static_cast<std::size_t>(x.data.cols());
        const auto p_z = static_cast<std::size_t>(z.data.cols());
        out.partition = LayerPartition(p_x, p_z);
        out.data.resize(x.data.rows(), x.data.cols() + z.data.cols());
        out.data.leftCols(x.data.cols()) = x.data;
        out.data.rightCols(z.data.cols()) = z.data;
        out.labels = x.labels.empty() ? synth_labels("X", p_x) : x.labels;
        const auto zl = z.labels.empty() ? synth_labels("Z", p_z) : z.labels;
        out.labels.insert(out.labels.end(), zl.begin(), zl.end());
    } else {
        ParsedTable t = parse_table(spec.path, spec.delimiter, spec.header);
        const auto p = static_cast<std::size_t>(t.data.cols());
        if (spec.split_px < 1 || spec.split_px >= p)
            throw DataError("layer split " + std::to_string(spec.split_px) +
                            " must lie in [1, " + std::to_string(p) + ") for '" + spec.path + "'");
        out.partition = LayerPartition(spec.split_px, p - spec.split_px);
        out.data = std::move(t.data);
        if (!t.labels.empty()) {
            out.labels = std::move(t.labels);
        } else {
            out.labels = synth_labels("X", spec.split_px);
            const auto zl = synth_labels("Z", p - spec.split_px);
            out.labels.insert(out.labels.end(), zl.begin(), zl.end());
        }
    }

    if (out.data.rows() < 2) throw DataError("need at least 2 samples");
    if (!out.data.allFinite()) throw DataError("data contains non-finite values");
    if (spec.standardize) standardize_columns(out.data, out.labels);
    return out;
}

void write_matrix_csv(const std::string& path, const Matrix& m,
                      const std::vector<std::string>& labels, const Provenance& prov) {
    std::string text = provenance_line(prov) + "\n";
    for (std::size_t j = 0; j < labels.size(); ++j) {
        if (j) text += ',';
        text += labels[j];
    }
    text += '\n';
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        for (Eigen::Index c = 0; c < m.cols(); ++c) {
            if (c) text += ',';
            text += format_double(m(r, c));
        }
        text += '\n';
    }
    write_text_file(path, text);
}

void write_adjacency_csv(const std::string& path, const BinaryMatrix& m,
                         const std::vector<std::string>& labels, const Provenance& prov) {
    std::string text = provenance_line(prov) + "\n";
    for (std::size_t j = 0; j < labels.size(); ++j) {
        if (j) text += ',';
        text += labels[j];
    }
    text += '\n';
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        for (Eigen::Index c = 0; c < m.cols(); ++c) {
            if (c) text += ',';
            text += std::to_string(m(r, c));
        }
        text += '\n';
    }
    write_text_file(path, text);
}

ExportFormat parse_export_format(const std::string& name) {
    if (name == "edgelist") return ExportFormat::EdgeList;
    if (name == "graphml") return ExportFormat::GraphML;
    if (name == "json") return ExportFormat::Json;
    throw ParameterError("unknown export format '" + name +
                         "' (expected edgelist, graphml or json)");
}

NetworkExport make_network_export(const FitRecord& record, SignConvention sign) {
    const auto p = record.partition.p();
    if (record.labels.size() != p) throw ParameterError("label count does not match the fit");
    if (static_cast<std::size_t>(record.theta.rows()) != p)
        throw ParameterError("precision matrix size does not match the partition");

    NetworkExport net;
    net.labels = record.labels;
    net.layer_of.resize(p);
    for (std::size_t i = 0; i < p; ++i)
        net.layer_of[i] = record.partition.layer(i) == Layer::X ? 0 : 1;
    net.hyper = record.hyper;
    net.convention = sign;
    net.provenance = record.provenance;

    for (std::size_t i = 0; i < p; ++i)
        for (std::size_t j = i + 1; j < p; ++j) {
            if (record.adjacency(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) == 0)
                continue;
            const double tij = record.theta(static_cast<Eigen::Index>(i),
                                            static_cast<Eigen::Index>(j));
            const double tii = record.theta(static_cast<Eigen::Index>(i),
                                            static_cast<Eigen::Index>(i));
            const double tjj = record.theta(static_cast<Eigen::Index>(j),
                                            static_cast<Eigen::Index>(j));
            if (tii <= 0.0 || tjj <= 0.0)
                throw NumericalError("nonpositive diagonal in the recovered precision matrix");
            double w = tij / std::sqrt(tii * tjj);
            if (sign == SignConvention::Standard) w = -w;
            net.edges.push_back(NetworkEdge{i, j, w, 1});
        }

    if (!net.edges.empty()) {
        std::vector<double> mags(net.edges.size());
        for (std::size_t e = 0; e < net.edges.size(); ++e) mags[e] = std::abs(net.edges[e].weight);
        const double q1 = quantile(mags, 0.25);
        const double q2 = quantile(mags, 0.50);
        const double q3 = quantile(mags, 0.75);
        for (auto& edge : net.edges) {
            const double m = std::abs(edge.weight);
            edge.quartile = 1 + (m > q1 ? 1 : 0) + (m > q2 ? 1 : 0) + (m > q3 ? 1 : 0);
        }
    }
    return net;
}

namespace {

std::string network_edgelist(const NetworkExport& net) {
    std::string text = provenance_line(net.provenance) + "\n";
    text += "node_a\tnode_b\tlayer_a\tlayer_b\tweight\tquartile\n";
    for (const auto& e : net.edges) {
        text += net.labels[e.a] + '\t' + net.labels[e.b] + '\t' + layer_tag(net.layer_of[e.a]) +
                '\t' + layer_tag(net.layer_of[e.b]) + '\t' + format_double(e.weight) + '\t' +
                std::to_string(e.quartile) + '\n';
    }
    return text;
}

std::string network_graphml(const NetworkExport& net) {
    std::string text =
        "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
        "<graphml xmlns=\"http://graphml.graphdrawing.org/xmlns\">\n"
        "  <key id=\"label\" for=\"node\" attr.name=\"label\" attr.type=\"string\"/>\n"
        "  <key id=\"layer\" for=\"node\" attr.name=\"layer\" attr.type=\"string\"/>\n"
        "  <key id=\"weight\" for=\"edge\" attr.name=\"weight\" attr.type=\"double\"/>\n"
        "  <key id=\"quartile\" for=\"edge\" attr.name=\"quartile\" attr.type=\"int\"/>\n"
        "  <key id=\"seed\" for=\"graph\" attr.name=\"seed\" attr.type=\"string\"/>\n"
        "  <key id=\"config_hash\" for=\"graph\" attr.name=\"config_hash\" attr.type=\"string\"/>\n"
        "  <key id=\"version\" for=\"graph\" attr.name=\"version\" attr.type=\"string\"/>\n"
        "  <graph id=\"G\" edgedefault=\"undirected\">\n";
    text += "    <data key=\"seed\">" + std::to_string(net.provenance.seed) + "</data>\n";
    text += "    <data key=\"config_hash\">" + net.provenance.config_hash + "</data>\n";
    text += "    <data key=\"version\">" + net.provenance.version + "</data>\n";
    for (std::size_t i = 0; i < net.labels.size(); ++i) {
        text += "    <node id=\"n" + std::to_string(i) + "\"><data key=\"label\">" +
                xml_escape(net.labels[i]) + "</data><data key=\"layer\">" +
                layer_tag(net.layer_of[i]) + "</data></node>\n";
    }
    for (const auto& e : net.edges) {
        text += "    <edge source=\"n" + std::to_string(e.a) + "\" target=\"n" +
                std::to_string(e.b) + "\"><data key=\"weight\">" + format_double(e.weight) +
                "</data><data key=\"quartile\">" + std::to_string(e.quartile) +
                "</data></edge>\n";
    }
    text += "  </graph>\n</graphml>\n";
    return text;
}

std::string network_json(const NetworkExport& net) {
    json j;
    j["provenance"] = provenance_json(net.provenance);
    j["hyperparameters"] = {{"lambda_w", net.hyper.lambda_w},
                            {"lambda_b", net.hyper.lambda_b},
                            {"c", net.hyper.c}};
    j["sign_convention"] = net.convention == SignConvention::Paper ? "paper" : "standard";
    json nodes = json::array();
    for (std::size_t i = 0; i < net.labels.size(); ++i)
        nodes.push_back({{"label", net.labels[i]}, {"layer", layer_tag(net.layer_of[i])}});
    j["nodes"] = std::move(nodes);
    json edges = json::array();
    for (const auto& e : net.edges)
        edges.push_back({{"a", e.a}, {"b", e.b}, {"weight", e.weight}, {"quartile", e.quartile}});
    j["edges"] = std::move(edges);
    return j.dump(2) + "\n";
}

}  // namespace

std::string network_to_string(const NetworkExport& net, ExportFormat format) {
    switch (format) {
        case ExportFormat::EdgeList: return network_edgelist(net);
        case ExportFormat::GraphML: return network_graphml(net);
        case ExportFormat::Json: return network_json(net);
    }
    throw ParameterError("unknown export format");
}

void write_network(const std::string& path, const NetworkExport& net, ExportFormat format) {
    write_text_file(path, network_to_string(net, format));
}

NetworkExport load_network_json(const std::string& path) {
    json j;
    try {
        j = json::parse(read_text_file(path));
    } catch (const json::exception& e) {
        throw DataError("cannot parse '" + path + "' as JSON: " + e.what());
    }
    try {
        NetworkExport net;
        net.provenance = provenance_from_json(j.at("provenance"));
        const auto& h = j.at("hyperparameters");
        net.hyper = Hyperparameters(h.at("lambda_w").get<double>(),
                                    h.at("lambda_b").get<double>(), h.at("c").get<double>());
        net.convention = j.at("sign_convention").get<std::string>() == "paper"
                             ? SignConvention::Paper
                             : SignConvention::Standard;
        for (const auto& node : j.at("nodes")) {
            net.labels.push_back(node.at("label").get<std::string>());
            net.layer_of.push_back(node.at("layer").get<std::string>() == "X" ? 0 : 1);
        }
        for (const auto& e : j.at("edges"))
            net.edges.push_back(NetworkEdge{e.at("a").get<std::size_t>(),
                                            e.at("b").get<std::size_t>(),
                                            e.at("weight").get<double>(),
                                            e.at("quartile").get<int>()});
        return net;
    } catch (const json::exception& e) {
        throw DataError("'" + path + "' is not a network file: " + e.what());
    }
}

FitRecord make_fit_record(const CoglassoFit& fit, const LayerPartition& partition,
                          const std::vector<std::string>& labels, const Provenance& prov) {
    if (partition.p() != fit.p()) throw ParameterError("partition size does not match the fit");
    if (labels.size() != fit.p()) throw ParameterError("label count does not match the fit");
    FitRecord rec;
    rec.hyper = fit.hyper;
    rec.partition = partition;
    rec.labels = labels;
    rec.adjacency = fit.adjacency;
    rec.theta = fit.Theta_hat;
    rec.iterations = fit.iterations;
    rec.converged = fit.converged;
    rec.inversion_residual = fit.inversion_residual;
    rec.provenance = prov;
    return rec;
}

bool fit_records_equal(const FitRecord& a, const FitRecord& b) {
    if (a.hyper.lambda_w != b.hyper.lambda_w || a.hyper.lambda_b != b.hyper.lambda_b ||
        a.hyper.c != b.hyper.c)
        return false;
    if (a.partition.p_x() != b.partition.p_x() || a.partition.p_z() != b.partition.p_z())
        return false;
    if (a.labels != b.labels) return false;
    if (a.adjacency.rows() != b.adjacency.rows() || a.theta.rows() != b.theta.rows()) return false;
    if ((a.adjacency - b.adjacency).cwiseAbs().maxCoeff() != 0) return false;
    for (Eigen::Index i = 0; i < a.theta.rows(); ++i)
        for (Eigen::Index j = 0; j < a.theta.cols(); ++j)
            if (a.theta(i, j) != b.theta(i, j)) return false;
    return a.iterations == b.iterations && a.converged == b.converged &&
           a.inversion_residual == b.inversion_residual && a.provenance == b.provenance;
}

std::string fit_to_json_string(const FitRecord& rec) {
    json j;
    j["provenance"] = provenance_json(rec.provenance);
    j["hyperparameters"] = {{"lambda_w", rec.hyper.lambda_w},
                            {"lambda_b", rec.hyper.lambda_b},
                            {"c", rec.hyper.c}};
    j["partition"] = {{"p_x", rec.partition.p_x()}, {"p_z", rec.partition.p_z()}};
    j["labels"] = rec.labels;
    json adj = json::array();
    for (Eigen::Index i = 0; i < rec.adjacency.rows(); ++i)
        for (Eigen::Index j2 = i + 1; j2 < rec.adjacency.cols(); ++j2)
            if (rec.adjacency(i, j2) != 0) adj.push_back({i, j2});
    j["adjacency"] = std::move(adj);
    json theta = json::array();
    for (Eigen::Index i = 0; i < rec.theta.rows(); ++i)
        for (Eigen::Index j2 = i; j2 < rec.theta.cols(); ++j2)
            if (rec.theta(i, j2) != 0.0) theta.push_back({i, j2, rec.theta(i, j2)});
    j["theta"] = std::move(theta);
    j["convergence"] = {{"iterations", rec.iterations},
                        {"converged", rec.converged},
                        {"inversion_residual", rec.inversion_residual}};
    return j.dump(2) + "\n";
}

void write_fit_json(const std::string& path, const FitRecord& rec) {
    write_text_file(path, fit_to_json_string(rec));
}

FitRecord load_fit_json(const std::string& path) {
    json j;
    try {
        j = json::parse(read_text_file(path));
    } catch (const json::exception& e) {
        throw DataError("cannot parse '" + path + "' as JSON: " + e.what());
    }
    try {
        FitRecord rec;
        rec.provenance = provenance_from_json(j.at("provenance"));
        const auto& h = j.at("hyperparameters");
        rec.hyper = Hyperparameters(h.at("lambda_w").get<double>(),
                                    h.at("lambda_b").get<double>(), h.at("c").get<double>());
        rec.partition = LayerPartition(j.at("partition").at("p_x").get<std::size_t>(),
                                       j.at("partition").at("p_z").get<std::size_t>());
        rec.labels = j.at("labels").get<std::vector<std::string>>();
        const auto p = static_cast<Eigen::Index>(rec.partition.p());
        rec.adjacency = BinaryMatrix::Zero(p, p);
        for (const auto& pair : j.at("adjacency")) {
            const auto a = pair.at(0).get<Eigen::Index>();
            const auto b = pair.at(1).get<Eigen::Index>();
            rec.adjacency(a, b) = 1;
            rec.adjacency(b, a) = 1;
        }
        rec.theta = Matrix::Zero(p, p);
        for (const auto& t : j.at("theta")) {
            const auto a = t.at(0).get<Eigen::Index>();
            const auto b = t.at(1).get<Eigen::Index>();
            const double v = t.at(2).get<double>();
            rec.theta(a, b) = v;
            rec.theta(b, a) = v;
        }
        rec.iterations = j.at("convergence").at("iterations").get<int>();
        rec.converged = j.at("convergence").at("converged").get<bool>();
        rec.inversion_residual = j.at("convergence").at("inversion_residual").get<double>();
        return rec;
    } catch (const json::exception& e) {
        throw DataError("'" + path + "' is not a fit file: " + e.what());
    }
}

std::string selection_to_json_string(const SelectionResult& sel, const CoglassoGrids& grids,
                                     const Provenance& prov) {
    json j;
    j["provenance"] = provenance_json(prov);
    j["selected"] = {{"lambda_w", sel.lambda_w_hat},
                     {"lambda_b", sel.lambda_b_hat},
                     {"c", sel.c_hat}};
    j["iterations"] = sel.iterations;
    j["converged"] = sel.converged;
    j["grids"] = {{"lambda_w", grids.lambda_w}, {"lambda_b", grids.lambda_b}, {"c", grids.c}};
    json traces = json::array();
    for (const auto& t : sel.traces) {
        traces.push_back({{"axis", axis_name(t.axis)},
                          {"values", t.values},
                          {"instability", t.instability},
                          {"monotonized", t.monotonized},
                          {"chosen_index", t.chosen_index}});
    }
    j["traces"] = std::move(traces);
    return j.dump(2) + "\n";
}

void write_selection_json(const std::string& path, const SelectionResult& sel,
                          const CoglassoGrids& grids, const Provenance& prov) {
    write_text_file(path, selection_to_json_string(sel, grids, prov));
}

namespace {

void append_bench_row(std::string& text, std::size_t replicate, const char* method,
                      const char* kind, const char* metric, double value,
                      const Hyperparameters* hyper, const double* lambda) {
    text += std::to_string(replicate);
    text += ',';
    text += method;
    text += ',';
    text += kind;
    text += ',';
    text += metric;
    text += ',';
    text += format_double(value);
    text += ',';
    if (hyper) {
        text += format_double(hyper->lambda_w);
        text += ',';
        text += format_double(hyper->lambda_b);
        text += ',';
        text += format_double(hyper->c);
        text += ',';
    } else {
        text += ",,,";
    }
    if (lambda) text += format_double(*lambda);
    text += '\n';
}

}  // namespace

std::string bench_records_csv(const BenchReport& report, const Provenance& prov) {
    std::string text = provenance_line(prov) + "\n";
    text += "replicate,method,kind,metric,value,lambda_w,lambda_b,c,lambda\n";
    for (const auto& rec : report.oracle) {
        const std::size_t r = rec.replicate_id;
        if (r < report.replicate_errors.size() && !report.replicate_errors[r].empty()) continue;
        append_bench_row(text, r, "coglasso", "oracle", "f1", rec.cog_best_f1, &rec.cog_at_f1,
                         nullptr);
        append_bench_row(text, r, "coglasso", "oracle", "mcc", rec.cog_best_mcc, &rec.cog_at_mcc,
                         nullptr);
        if (rec.cog_kld_available)
            append_bench_row(text, r, "coglasso", "oracle", "kld", rec.cog_best_kld,
                             &rec.cog_at_kld, nullptr);
        append_bench_row(text, r, "glasso", "oracle", "f1", rec.gl_best_f1, nullptr,
                         &rec.gl_lambda_at_f1);
        append_bench_row(text, r, "glasso", "oracle", "mcc", rec.gl_best_mcc, nullptr,
                         &rec.gl_lambda_at_mcc);
        if (rec.gl_kld_available)
            append_bench_row(text, r, "glasso", "oracle", "kld", rec.gl_best_kld, nullptr,
                             &rec.gl_lambda_at_kld);
    }
    for (const auto& rec : report.selection) {
        const std::size_t r = rec.replicate_id;
        if (r < report.replicate_errors.size() && !report.replicate_errors[r].empty()) continue;
        const Hyperparameters chosen(rec.lambda_w_hat, rec.lambda_b_hat, rec.c_hat);
        append_bench_row(text, r, "coglasso", "selected", "f1", rec.cog_f1, &chosen, nullptr);
        append_bench_row(text, r, "coglasso", "selected", "mcc", rec.cog_mcc, &chosen, nullptr);
        if (rec.cog_kld_available)
            append_bench_row(text, r, "coglasso", "selected", "kld", rec.cog_kld, &chosen,
                             nullptr);
        append_bench_row(text, r, "glasso", "selected", "f1", rec.gl_f1, nullptr,
                         &rec.gl_lambda_hat);
        append_bench_row(text, r, "glasso", "selected", "mcc", rec.gl_mcc, nullptr,
                         &rec.gl_lambda_hat);
        if (rec.gl_kld_available)
            append_bench_row(text, r, "glasso", "selected", "kld", rec.gl_kld, nullptr,
                             &rec.gl_lambda_hat);
    }
    return text;
}

std::string bench_summary_json(const BenchReport& report, const Provenance& prov) {
    json j;
    j["provenance"] = provenance_json(prov);
    j["scenario"] = report.scenario_id;
    j["seed"] = report.seed;
    j["num_replicates"] = report.num_replicates;
    j["complete"] = report.complete;
    j["config"] = {{"lambda_count_cog", report.config.lambda_count_cog},
                   {"lambda_count_gl", report.config.lambda_count_gl},
                   {"c_grid", report.config.c_grid},
                   {"grid_ratio", report.config.grid_ratio},
                   {"num_subsamples", report.config.stability.num_subsamples},
                   {"subsample_size", report.config.stability.subsample_size},
                   {"instability_threshold", report.config.stability.instability_threshold},
                   {"outer_tol", report.config.conv.outer_tol},
                   {"inner_tol", report.config.conv.inner_tol},
                   {"max_outer", report.config.conv.max_outer},
                   {"max_inner", report.config.conv.max_inner}};

    // lambda grids are derived per replicate; record them for auditability
    json grids = json::array();
    for (const auto& rec : report.oracle)
        grids.push_back({{"replicate", rec.replicate_id},
                         {"lambda_w", rec.cog_grid.lambda_w},
                         {"lambda_b", rec.cog_grid.lambda_b},
                         {"c", rec.cog_grid.c},
                         {"glasso_lambda", rec.gl_grid}});
    for (const auto& rec : report.selection)
        grids.push_back({{"replicate", rec.replicate_id},
                         {"kind", "selection"},
                         {"lambda_w", rec.cog_grid.lambda_w},
                         {"lambda_b", rec.cog_grid.lambda_b},
                         {"c", rec.cog_grid.c},
                         {"glasso_lambda", rec.gl_grid}});
    j["grids"] = std::move(grids);

    json aggregates = json::array();
    for (const auto& row : summarize(report))
        aggregates.push_back({{"method", row.method},
                              {"kind", row.kind},
                              {"metric", row.metric},
                              {"count", row.count},
                              {"median", row.median},
                              {"q1", row.q1},
                              {"q3", row.q3}});
    j["aggregates"] = std::move(aggregates);
    j["replicate_errors"] = report.replicate_errors;
    return j.dump(2) + "\n";
}

void write_bench_report(const std::string& dir, const BenchReport& report,
                        const Provenance& prov) {
    fs::create_directories(dir);
    write_text_file((fs::path(dir) / "records.csv").string(), bench_records_csv(report, prov));
    write_text_file((fs::path(dir) / "summary.json").string(),
                    bench_summary_json(report, prov));
}

void write_scenario(const std::string& dir, const ScenarioSpec& spec, const SimulatedScenario& sim,
                    const Provenance& prov) {
    fs::create_directories(dir);
    fs::create_directories(fs::path(dir) / "replicates");

    std::vector<std::string> labels(sim.truth.p());
    for (std::size_t i = 0; i < sim.truth.p(); ++i)
        labels[i] = i < sim.truth.partition.p_x()
                        ? "X" + std::to_string(i + 1)
                        : "Z" + std::to_string(i - sim.truth.partition.p_x() + 1);

    write_matrix_csv((fs::path(dir) / "theta.csv").string(), sim.truth.theta, labels, prov);
    write_matrix_csv((fs::path(dir) / "sigma.csv").string(), sim.truth.sigma, labels, prov);
    write_adjacency_csv((fs::path(dir) / "adjacency.csv").string(), sim.truth.adjacency, labels,
                        prov);

    for (std::size_t r = 0; r < sim.replicates.size(); ++r) {
        char name[32];
        std::snprintf(name, sizeof(name), "rep_%03zu.csv", r);
        write_matrix_csv((fs::path(dir) / "replicates" / name).string(), sim.replicates[r],
                         labels, prov);
    }

    json manifest;
    manifest["provenance"] = provenance_json(prov);
    manifest["scenario"] = {{"id", spec.id},
                            {"p_x", spec.p_x},
                            {"clusters_x", spec.clusters_x},
                            {"within_prob_x", spec.within_prob_x},
                            {"extra_edges_x", spec.extra_edges_x},
                            {"p_z", spec.p_z},
                            {"clusters_z", spec.clusters_z},
                            {"within_prob_z", spec.within_prob_z},
                            {"extra_edges_z", spec.extra_edges_z},
                            {"epsilon", spec.epsilon},
                            {"target_activation", spec.target_activation},
                            {"n_regression", spec.n_regression},
                            {"n_replicate", spec.n_replicate}};
    manifest["cross_block"] = {{"activation", sim.cross_block.activation},
                               {"penalty_used", sim.cross_block.penalty_used},
                               {"fallback_weakest", sim.cross_block.fallback_weakest}};
    manifest["epsilon_applied"] = sim.truth.epsilon;
    manifest["epsilon_doublings"] = sim.truth.epsilon_doublings;
    manifest["num_replicates"] = sim.replicates.size();
    write_text_file((fs::path(dir) / "manifest.json").string(), manifest.dump(2) + "\n");
}

}  // namespace coglasso
