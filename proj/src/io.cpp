#include "shaping/io.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "nlohmann/json.hpp"

namespace shaping {

namespace fs = std::filesystem;

std::string format_double(double v) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

void write_text_file(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open for writing: " + path.string());
    out << text;
    if (!out) throw std::runtime_error("write failed: " + path.string());
}

std::string read_text_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open for reading: " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_mi_curve_csv(const fs::path& path, const MICurve& curve) {
    std::string text = "snr,mi\n";
    for (const auto& [snr, mi] : curve.entries)
        text += format_double(snr) + "," + format_double(mi) + "\n";
    write_text_file(path, text);
}

MICurve read_mi_curve_csv(const fs::path& path) {
    std::istringstream in(read_text_file(path));
    std::string line;
    if (!std::getline(in, line) || line.rfind("snr,mi", 0) != 0)
        throw std::runtime_error("not an MI curve CSV (missing snr,mi header): " + path.string());
    MICurve curve;
    curve.scheme = path.stem().string();
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const std::size_t comma = line.find(',');
        if (comma == std::string::npos)
            throw std::runtime_error("malformed CSV row in " + path.string() + ": " + line);
        curve.entries.emplace_back(std::stod(line.substr(0, comma)),
                                   std::stod(line.substr(comma + 1)));
    }
    return curve;
}

void write_constellation_csv(const fs::path& path, const Constellation& c,
                             const SymbolDistribution& dist) {
    if (dist.order() != c.order()) throw ShapeError("write_constellation_csv: order mismatch");
    std::string text = "re,im,prob\n";
    for (int s = 0; s < c.order(); ++s)
        text += format_double(c.points.at(s, 0)) + "," + format_double(c.points.at(s, 1)) + "," +
                format_double(dist.probs[static_cast<std::size_t>(s)]) + "\n";
    write_text_file(path, text);
}

void write_distribution_csv(const fs::path& path, const SymbolDistribution& dist) {
    std::string text = "symbol,prob\n";
    for (int s = 0; s < dist.order(); ++s)
        text += std::to_string(s) + "," + format_double(dist.probs[static_cast<std::size_t>(s)]) + "\n";
    write_text_file(path, text);
}

void write_loss_curve_csv(const fs::path& path, const std::vector<LossCurveRow>& rows) {
    std::string text = "step,loss_bits,entropy_bits,mi_bound_bits\n";
    for (const auto& row : rows)
        text += std::to_string(row.step) + "," + format_double(row.loss_bits) + "," +
                format_double(row.entropy_bits) + "," + format_double(row.mi_bound_bits) + "\n";
    write_text_file(path, text);
}

std::vector<double> parse_snr_grid(const std::string& spec) {
    std::vector<double> grid;
    if (spec.find(':') != std::string::npos) {
        double lo = 0.0, hi = 0.0, step = 0.0;
        if (std::sscanf(spec.c_str(), "%lf:%lf:%lf", &lo, &hi, &step) != 3 || step <= 0.0)
            throw ConfigError("snr-grid: expected lo:hi:step with positive step, got '" + spec +
                              "'");
        for (double v = lo; v <= hi + 1e-9; v += step) grid.push_back(v);
    } else {
        std::istringstream in(spec);
        std::string tok;
        while (std::getline(in, tok, ',')) {
            if (tok.empty()) continue;
            grid.push_back(std::stod(tok));
        }
    }
    if (grid.empty()) throw ConfigError("snr-grid: empty grid from '" + spec + "'");
    for (std::size_t i = 1; i < grid.size(); ++i)
        if (grid[i] <= grid[i - 1])
            throw ConfigError("snr-grid: values must strictly increase");
    return grid;
}

std::uint64_t fnv1a_hash(const std::string& text) {
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : text) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

void write_manifest(const fs::path& out_dir, const std::string& command,
                    const std::string& config_json, std::uint64_t seed,
                    const std::vector<std::string>& outputs) {
    nlohmann::json doc;
    doc["command"] = command;
    doc["config"] = nlohmann::json::parse(config_json);
    char hash_hex[20];
    std::snprintf(hash_hex, sizeof(hash_hex), "%016llx",
                  static_cast<unsigned long long>(fnv1a_hash(config_json)));
    doc["config_hash"] = hash_hex;
    doc["seed"] = seed;
    doc["version"] = "0.1.0";
    doc["outputs"] = outputs;
    write_text_file(out_dir / "manifest.json", doc.dump(2));
}

RunLock::RunLock(const fs::path& dir) : lock_path_(dir / ".lock") {
    fs::create_directories(dir);
    std::FILE* f = std::fopen(lock_path_.string().c_str(), "wx");
    if (!f)
        throw std::runtime_error("run directory is locked by another command: " + dir.string());
    std::fclose(f);
    held_ = true;
}

RunLock::~RunLock() {
    if (held_) {
        std::error_code ec;
        fs::remove(lock_path_, ec);
    }
}

}  // namespace shaping
