#include "wmgraph/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "wmgraph/errors.hpp"

namespace wmgraph {
namespace {

using json = nlohmann::json;

int line_at(const std::string& text, std::size_t byte) {
    byte = std::min(byte, text.size());
    return 1 + static_cast<int>(std::count(text.begin(), text.begin() + static_cast<long>(byte), '\n'));
}

// Line of each object that starts directly inside the top-level array `key`.
std::vector<int> element_lines(const std::string& text, const std::string& key) {
    std::vector<int> lines;
    std::vector<char> stack;
    int line = 1, array_depth = -1;
    std::string last_key, current;
    bool in_string = false, escape = false;
    for (char c : text) {
        if (c == '\n') ++line;
        if (in_string) {
            if (escape) {
                escape = false;
                current += c;
            } else if (c == '\\') {
                escape = true;
            } else if (c == '"') {
                in_string = false;
                if (stack.size() == 1) last_key = current;
            } else {
                current += c;
            }
            continue;
        }
        switch (c) {
            case '"':
                in_string = true;
                current.clear();
                break;
            case '{':
                if (array_depth >= 0 && static_cast<int>(stack.size()) == array_depth) lines.push_back(line);
                stack.push_back(c);
                break;
            case '[':
                stack.push_back(c);
                if (stack.size() == 2 && last_key == key) array_depth = 2;
                break;
            case '}':
            case ']':
                if (!stack.empty()) stack.pop_back();
                if (static_cast<int>(stack.size()) < array_depth) array_depth = -1;
                break;
            default:
                break;
        }
    }
    return lines;
}

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("cannot open '" + path + "'", 0);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> out;
    std::string cell;
    std::istringstream ss(line);
    while (std::getline(ss, cell, ',')) {
        const auto b = cell.find_first_not_of(" \t\r");
        const auto e = cell.find_last_not_of(" \t\r");
        out.push_back(b == std::string::npos ? "" : cell.substr(b, e - b + 1));
    }
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

double to_double(const std::string& s, int line) {
    try {
        std::size_t pos = 0;
        const double v = std::stod(s, &pos);
        if (pos != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw ParseError("not a number: '" + s + "'", line);
    }
}

std::int64_t to_int(const std::string& s, int line) {
    try {
        std::size_t pos = 0;
        const long long v = std::stoll(s, &pos);
        if (pos != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw ParseError("not an integer: '" + s + "'", line);
    }
}

// Rows of a CSV whose header starts with the given columns; returns (line, cells).
std::vector<std::pair<int, std::vector<std::string>>> read_table(std::istream& in,
                                                                 const std::vector<std::string>& columns) {
    std::string line;
    int no = 0;
    std::vector<std::pair<int, std::vector<std::string>>> rows;
    bool header = false;
    while (std::getline(in, line)) {
        ++no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        auto cells = split_csv(line);
        if (!header) {
            for (std::size_t i = 0; i < columns.size(); ++i) {
                if (i >= cells.size() || cells[i] != columns[i])
                    throw ParseError("expected header starting with '" + columns[0] + "'", no);
            }
            header = true;
            continue;
        }
        if (cells.size() < columns.size())
            throw ParseError("expected " + std::to_string(columns.size()) + " columns", no);
        rows.emplace_back(no, std::move(cells));
    }
    if (!header) throw ParseError("empty table", no);
    return rows;
}

Location to_location(const MetricGraph& g, const std::vector<std::string>& cells, int line) {
    Location s;
    try {
        s.edge = g.edge_index(to_int(cells[0], line));
        s.t = to_double(cells[1], line);
        g.validate(s);
    } catch (const GraphError& e) {
        throw ParseError(e.what(), line);
    }
    return s;
}

}  // namespace

MetricGraph parse_graph_json(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ParseError(e.what(), line_at(text, e.byte > 0 ? e.byte - 1 : 0));
    }
    if (!doc.is_object() || !doc.contains("vertices") || !doc.contains("edges") || !doc["vertices"].is_array() ||
        !doc["edges"].is_array())
        throw ParseError("graph needs 'vertices' and 'edges' arrays", 1);

    const auto vlines = element_lines(text, "vertices");
    const auto elines = element_lines(text, "edges");
    auto where = [](const std::vector<int>& lines, std::size_t i) { return i < lines.size() ? lines[i] : 0; };

    std::vector<Vertex> vertices;
    for (std::size_t i = 0; i < doc["vertices"].size(); ++i) {
        const json& v = doc["vertices"][i];
        const int ln = where(vlines, i);
        if (!v.is_object() || !v.contains("id") || !v["id"].is_number_integer())
            throw ParseError("vertex needs an integer 'id'", ln);
        Vertex vx;
        vx.id = v["id"].get<std::int64_t>();
        for (const char* c : {"x", "y"}) {
            if (!v.contains(c)) continue;
            if (!v[c].is_number()) throw ParseError(std::string("vertex coordinate '") + c + "' must be a number", ln);
            (c[0] == 'x' ? vx.x : vx.y) = v[c].get<double>();
        }
        vertices.push_back(vx);
    }
    std::vector<EdgeRecord> edges;
    for (std::size_t i = 0; i < doc["edges"].size(); ++i) {
        const json& e = doc["edges"][i];
        const int ln = where(elines, i);
        if (!e.is_object()) throw ParseError("edge must be an object", ln);
        for (const char* f : {"id", "from", "to"}) {
            if (!e.contains(f) || !e[f].is_number_integer())
                throw ParseError(std::string("edge needs an integer '") + f + "'", ln);
        }
        if (!e.contains("length") || !e["length"].is_number()) throw ParseError("edge needs a numeric 'length'", ln);
        EdgeRecord r{e["id"].get<std::int64_t>(), e["from"].get<std::int64_t>(), e["to"].get<std::int64_t>(),
                     e["length"].get<double>()};
        if (!(r.length > 0.0) || !std::isfinite(r.length))
            throw ParseError("edge " + std::to_string(r.id) + " has non-positive length", ln);
        bool from_ok = false, to_ok = false;
        for (const auto& v : vertices) {
            from_ok |= v.id == r.from;
            to_ok |= v.id == r.to;
        }
        if (!from_ok || !to_ok) throw ParseError("edge " + std::to_string(r.id) + " has an undeclared endpoint", ln);
        edges.push_back(r);
    }
    return MetricGraph::build(std::move(vertices), edges);
}

MetricGraph read_graph_json(const std::string& path) { return parse_graph_json(slurp(path)); }

std::string graph_to_json(const MetricGraph& g) {
    json doc;
    doc["vertices"] = json::array();
    for (const auto& v : g.vertices()) {
        json jv{{"id", v.id}};
        if (v.x) jv["x"] = *v.x;
        if (v.y) jv["y"] = *v.y;
        doc["vertices"].push_back(jv);
    }
    doc["edges"] = json::array();
    for (const auto& e : g.edges()) {
        doc["edges"].push_back({{"id", e.id},
                                {"from", g.vertex(e.from).id},
                                {"to", g.vertex(e.to).id},
                                {"length", e.length}});
    }
    return doc.dump(2) + "\n";
}

std::vector<Location> read_locations_csv(std::istream& in, const MetricGraph& g) {
    std::vector<Location> out;
    for (const auto& [line, cells] : read_table(in, {"edge_id", "t"})) out.push_back(to_location(g, cells, line));
    return out;
}

ObservationSet read_observations_csv(std::istream& in, const MetricGraph& g) {
    const auto rows = read_table(in, {"edge_id", "t", "value"});
    ObservationSet obs;
    obs.values.resize(static_cast<int>(rows.size()));
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const auto& [line, cells] = rows[i];
        obs.locations.push_back(to_location(g, cells, line));
        const double v = to_double(cells[2], line);
        if (!std::isfinite(v)) throw ParseError("non-finite value", line);
        obs.values[static_cast<int>(i)] = v;
    }
    return obs;
}

std::vector<Location> read_locations_csv(const std::string& path, const MetricGraph& g) {
    std::istringstream in(slurp(path));
    return read_locations_csv(in, g);
}

ObservationSet read_observations_csv(const std::string& path, const MetricGraph& g) {
    std::istringstream in(slurp(path));
    return read_observations_csv(in, g);
}

std::string format_double(double v, int digits) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*g", digits, v);
    return buf;
}

void write_values_csv(std::ostream& out, const MetricGraph& g, const std::vector<Location>& locs,
                      const Eigen::VectorXd& values) {
    out << "edge_id,t,value\n";
    for (std::size_t i = 0; i < locs.size(); ++i) {
        out << g.edge(locs[i].edge).id << ',' << format_double(locs[i].t) << ','
            << format_double(values[static_cast<int>(i)]) << '\n';
    }
}

void write_predictions_csv(std::ostream& out, const MetricGraph& g, const std::vector<GaussianPredictive>& pred) {
    out << "edge_id,t,mean,var\n";
    for (const auto& p : pred) {
        out << g.edge(p.location.edge).id << ',' << format_double(p.location.t) << ',' << format_double(p.mean) << ','
            << format_double(p.var) << '\n';
    }
}

}  // namespace wmgraph
