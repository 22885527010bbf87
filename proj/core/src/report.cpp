#include "dmalab/report.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "dmalab/errors.hpp"

namespace dmalab {

nlohmann::json vec_to_json(const Vec& v) {
    nlohmann::json j = nlohmann::json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) j.push_back(v[i]);
    return j;
}

Vec vec_from_json(const nlohmann::json& j) {
    if (!j.is_array()) throw ParameterError("expected a numeric array");
    Vec v(static_cast<Eigen::Index>(j.size()));
    for (std::size_t i = 0; i < j.size(); ++i) {
        if (!j[i].is_number()) throw ParameterError("expected a numeric array");
        v[static_cast<Eigen::Index>(i)] = j[i].get<double>();
    }
    return v;
}

nlohmann::json frame_to_json(const LocalFrame& frame) {
    nlohmann::json rows = nlohmann::json::array();
    for (Eigen::Index i = 0; i < frame.rotation.rows(); ++i) rows.push_back(vec_to_json(frame.rotation.row(i).transpose()));
    return {{"origin", vec_to_json(frame.origin)},
            {"rotation", rows},
            {"boundary_point", vec_to_json(frame.source_boundary)},
            {"interior_point", vec_to_json(frame.source_interior)}};
}

nlohmann::json to_json(const AEtaCertificate& cert) {
    nlohmann::json j{{"a", cert.a},
                     {"eta", cert.eta},
                     {"status", to_string(cert.status)},
                     {"reason", cert.reason},
                     {"samples", cert.samples},
                     {"worst_point", vec_to_json(cert.worst_point)}};
    j["point"] = cert.point ? vec_to_json(*cert.point) : nlohmann::json("all");
    return j;
}

nlohmann::json to_json(const SphereCertificate& cert) {
    auto witnesses = [](const std::vector<SphereWitness>& ws) {
        nlohmann::json arr = nlohmann::json::array();
        for (const auto& w : ws) {
            arr.push_back({{"boundary_point", vec_to_json(w.boundary_point)}, {"center", vec_to_json(w.center)}});
        }
        return arr;
    };
    nlohmann::json j;
    j["exterior_radius"] = cert.exterior_radius ? nlohmann::json(*cert.exterior_radius) : nlohmann::json();
    j["interior_radius"] = cert.interior_radius ? nlohmann::json(*cert.interior_radius) : nlohmann::json();
    j["exterior_witnesses"] = witnesses(cert.exterior_witnesses);
    j["interior_witnesses"] = witnesses(cert.interior_witnesses);
    if (cert.exterior_obstruction) j["exterior_obstruction"] = vec_to_json(*cert.exterior_obstruction);
    if (cert.interior_obstruction) j["interior_obstruction"] = vec_to_json(*cert.interior_obstruction);
    return j;
}

std::uint64_t fnv1a64(std::string_view bytes) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::string hex64(std::uint64_t value) {
    std::ostringstream out;
    out << std::hex << std::setw(16) << std::setfill('0') << value;
    return out.str();
}

void write_atomic(const std::filesystem::path& path, const std::string& content) {
    std::error_code ec;
    if (path.has_parent_path()) {
        std::filesystem::create_directories(path.parent_path(), ec);
        if (ec) throw IoError("cannot create directory " + path.parent_path().string() + ": " + ec.message());
    }
    std::filesystem::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw IoError("cannot open " + tmp.string() + " for writing");
        out << content;
        out.flush();
        if (!out) throw IoError("write failed for " + tmp.string());
    }
    std::filesystem::rename(tmp, path, ec);
    if (ec) {
        std::filesystem::remove(tmp, ec);
        throw IoError("cannot rename into " + path.string());
    }
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot read " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

std::string format_table(const std::vector<std::string>& header, const std::vector<std::vector<double>>& rows) {
    std::ostringstream out;
    for (std::size_t i = 0; i < header.size(); ++i) out << (i ? " " : "") << header[i];
    out << '\n' << std::setprecision(17);
    for (const auto& row : rows) {
        for (std::size_t i = 0; i < row.size(); ++i) out << (i ? " " : "") << row[i];
        out << '\n';
    }
    return out.str();
}

std::vector<std::vector<double>> parse_table(const std::string& text, std::vector<std::string>* header) {
    std::istringstream in(text);
    std::string line;
    std::vector<std::vector<double>> rows;
    if (!std::getline(in, line)) throw IoError("empty table");
    if (header) {
        header->clear();
        std::istringstream hs(line);
        std::string name;
        while (hs >> name) header->push_back(name);
    }
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream ls(line);
        std::vector<double> row;
        std::string tok;
        while (ls >> tok) {
            try {
                row.push_back(std::stod(tok));
            } catch (const std::exception&) {
                throw IoError("malformed table entry '" + tok + "'");
            }
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

}  // namespace dmalab
