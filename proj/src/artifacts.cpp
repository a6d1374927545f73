#include "sparsegen/artifacts.hpp"

#include <charconv>
#include <fstream>

#include "json.hpp"
#include "sparsegen/util.hpp"

namespace sparsegen {

using ordered_json = nlohmann::ordered_json;

namespace {

std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += "\"\"";
        else out += c;
    }
    out += '"';
    return out;
}

std::vector<std::string> parse_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string cur;
    bool quoted = false;
    for (size_t i = 0; i < line.size(); ++i) {
        char c = line[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    cur += '"';
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                cur += c;
            }
        } else if (c == '"' && cur.empty()) {
            quoted = true;
        } else if (c == ',') {
            fields.push_back(std::move(cur));
            cur.clear();
        } else {
            cur += c;
        }
    }
    fields.push_back(std::move(cur));
    return fields;
}

double parse_double(const std::string& s, const std::string& context) {
    double v = 0.0;
    auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
        throw ConfigError(context + ": bad number \"" + s + "\"");
    }
    return v;
}

std::vector<std::string> read_lines(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open file: " + path);
    std::vector<std::string> lines;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        lines.push_back(line);
    }
    if (in.bad()) throw IoError("read failed: " + path);
    return lines;
}

}  // namespace

void write_reduced_points_csv(const std::string& path, const std::vector<ReducedPoint>& points) {
    const size_t dims = points.empty() ? 0 : points[0].coords.size();
    std::string csv = "id";
    for (size_t d = 0; d < dims; ++d) csv += ",c" + std::to_string(d);
    csv += "\n";
    for (const auto& p : points) {
        csv += csv_field(p.id);
        for (double c : p.coords) csv += "," + format_double(c);
        csv += "\n";
    }
    write_file(path, csv);
}

std::vector<ReducedPoint> read_reduced_points_csv(const std::string& path) {
    auto lines = read_lines(path);
    if (lines.empty()) throw ConfigError(path + ": missing header");
    const size_t dims = parse_csv_line(lines[0]).size() - 1;
    if (dims < 1) throw ConfigError(path + ": header has no coordinate columns");
    std::vector<ReducedPoint> out;
    for (size_t i = 1; i < lines.size(); ++i) {
        if (lines[i].empty()) continue;
        auto fields = parse_csv_line(lines[i]);
        if (fields.size() != dims + 1) {
            throw ConfigError(path + " line " + std::to_string(i + 1) + ": expected " +
                              std::to_string(dims + 1) + " fields");
        }
        ReducedPoint p;
        p.id = fields[0];
        for (size_t d = 0; d < dims; ++d) {
            p.coords.push_back(parse_double(fields[d + 1], path));
        }
        out.push_back(std::move(p));
    }
    return out;
}

void write_projector_json(const std::string& path, const Projector& projector) {
    if (projector.kind != ReducerKind::pca) {
        throw ConfigError("projector persistence: only PCA projectors can be saved");
    }
    ordered_json j;
    j["kind"] = "pca";
    j["k_dim"] = projector.k_dim;
    j["n_dim"] = projector.n_dim;
    j["mean"] = projector.mean;
    auto rows = ordered_json::array();
    for (uint32_t r = 0; r < projector.k_dim; ++r) {
        rows.push_back(std::vector<double>(projector.component(r),
                                           projector.component(r) + projector.n_dim));
    }
    j["components"] = std::move(rows);
    j["eigenvalues"] = projector.eigenvalues;
    write_file(path, j.dump(2) + "\n");
}

Projector read_projector_json(const std::string& path) {
    ordered_json j;
    try {
        j = ordered_json::parse(read_file(path));
    } catch (const std::exception& e) {
        throw ConfigError(path + ": " + e.what());
    }
    Projector p;
    try {
        if (j.at("kind").get<std::string>() != "pca") {
            throw ConfigError(path + ": only PCA projectors are persistable");
        }
        p.kind = ReducerKind::pca;
        p.k_dim = j.at("k_dim").get<uint32_t>();
        p.n_dim = j.at("n_dim").get<uint32_t>();
        p.mean = j.at("mean").get<std::vector<double>>();
        p.eigenvalues = j.at("eigenvalues").get<std::vector<double>>();
        for (const auto& row : j.at("components")) {
            auto vals = row.get<std::vector<double>>();
            if (vals.size() != p.n_dim) throw ConfigError(path + ": component length mismatch");
            p.components.insert(p.components.end(), vals.begin(), vals.end());
        }
        if (p.components.size() != size_t(p.k_dim) * p.n_dim || p.mean.size() != p.n_dim) {
            throw ConfigError(path + ": inconsistent projector shape");
        }
    } catch (const ordered_json::exception& e) {
        throw ConfigError(path + ": " + e.what());
    }
    return p;
}

void write_cells_csv(const std::string& path, const GridScan& scan) {
    const uint32_t dims = scan.box.dims();
    std::string csv = "cell_id";
    for (uint32_t d = 0; d < dims; ++d) csv += ",origin_" + std::to_string(d);
    csv += ",count\n";
    for (const auto& cell : scan.cells) {
        csv += cell.cell_id;
        for (double v : cell.origin) csv += "," + format_double(v);
        csv += "," + std::to_string(cell.count) + "\n";
    }
    write_file(path, csv);
}

void write_seed_pairs_csv(const std::string& path, const std::vector<SeedPair>& pairs) {
    std::string csv = "region_id,first_id,second_id,axis,first_fallback,second_fallback\n";
    for (const auto& p : pairs) {
        csv += csv_field(p.region_id) + "," + csv_field(p.first_id) + "," +
               csv_field(p.second_id) + "," + std::to_string(p.axis) + "," +
               (p.first_fallback ? "1" : "0") + "," + (p.second_fallback ? "1" : "0") + "\n";
    }
    write_file(path, csv);
}

std::vector<SeedPair> read_seed_pairs_csv(const std::string& path) {
    auto lines = read_lines(path);
    if (lines.empty()) throw ConfigError(path + ": missing header");
    std::vector<SeedPair> out;
    for (size_t i = 1; i < lines.size(); ++i) {
        if (lines[i].empty()) continue;
        auto fields = parse_csv_line(lines[i]);
        if (fields.size() != 6) {
            throw ConfigError(path + " line " + std::to_string(i + 1) + ": expected 6 fields");
        }
        SeedPair p;
        p.region_id = fields[0];
        p.first_id = fields[1];
        p.second_id = fields[2];
        p.axis = static_cast<uint32_t>(parse_double(fields[3], path));
        p.first_fallback = fields[4] == "1";
        p.second_fallback = fields[5] == "1";
        out.push_back(std::move(p));
    }
    return out;
}

void write_decoded_jsonl(const std::string& path, const std::vector<DecodedText>& decoded) {
    std::string buf;
    for (const auto& d : decoded) {
        ordered_json j;
        j["region_id"] = d.region_id;
        j["text"] = d.text;
        buf += j.dump();
        buf += '\n';
    }
    write_file(path, buf);
}

std::vector<DecodedText> read_decoded_jsonl(const std::string& path) {
    auto lines = read_lines(path);
    std::vector<DecodedText> out;
    for (size_t i = 0; i < lines.size(); ++i) {
        if (trim(lines[i]).empty()) continue;
        try {
            auto j = ordered_json::parse(lines[i]);
            out.push_back({j.at("region_id").get<std::string>(), j.at("text").get<std::string>()});
        } catch (const std::exception& e) {
            throw ConfigError(path + " line " + std::to_string(i + 1) + ": " + e.what());
        }
    }
    return out;
}

std::vector<PredictionRecord> read_predictions_jsonl(const std::string& path) {
    auto lines = read_lines(path);
    std::vector<PredictionRecord> out;
    for (size_t i = 0; i < lines.size(); ++i) {
        if (trim(lines[i]).empty()) continue;
        try {
            auto j = ordered_json::parse(lines[i]);
            PredictionRecord rec;
            rec.example_id = j.at("example_id").get<std::string>();
            rec.correct = j.at("correct").get<bool>();
            out.push_back(std::move(rec));
        } catch (const std::exception& e) {
            throw ConfigError(path + " line " + std::to_string(i + 1) + ": " + e.what());
        }
    }
    return out;
}

void write_interpolated_points_csv(const std::string& path,
                                   const std::vector<InterpolationPlacement>& placements) {
    const size_t dims = placements.empty() ? 0 : placements[0].coords.size();
    std::string csv = "region_id";
    for (size_t d = 0; d < dims; ++d) csv += ",c" + std::to_string(d);
    csv += ",in_cell\n";
    for (const auto& p : placements) {
        csv += csv_field(p.region_id);
        for (double c : p.coords) csv += "," + format_double(c);
        csv += std::string(",") + (p.in_cell ? "1" : "0") + "\n";
    }
    write_file(path, csv);
}

void write_quarantine_jsonl(const std::string& path,
                            const std::vector<QuarantineRecord>& records) {
    std::string buf;
    for (const auto& rec : records) {
        ordered_json prov;
        prov["region_id"] = rec.provenance.region_id;
        prov["seed_ids"] = rec.provenance.seed_ids;
        prov["method"] = to_string(rec.provenance.method);
        if (rec.provenance.decoded_text) prov["decoded_text"] = *rec.provenance.decoded_text;
        ordered_json j;
        j["provenance"] = std::move(prov);
        j["raw_text"] = rec.raw_text;
        j["error"] = rec.error;
        buf += j.dump();
        buf += '\n';
    }
    write_file(path, buf);
}

}  // namespace sparsegen
