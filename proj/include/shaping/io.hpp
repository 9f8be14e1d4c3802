#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "shaping/objectives.hpp"
#include "shaping/trainer.hpp"

namespace shaping {

// Shortest round-trip decimal text, '.' decimal point, locale independent.
std::string format_double(double v);

void write_text_file(const std::filesystem::path& path, const std::string& text);
std::string read_text_file(const std::filesystem::path& path);

// CSV columns `snr,mi`, one file per scheme.
void write_mi_curve_csv(const std::filesystem::path& path, const MICurve& curve);
// Scheme name comes from the file stem.
MICurve read_mi_curve_csv(const std::filesystem::path& path);

// CSV columns `re,im,prob`, one row per constellation point.
void write_constellation_csv(const std::filesystem::path& path, const Constellation& c,
                             const SymbolDistribution& dist);

// CSV columns `symbol,prob`.
void write_distribution_csv(const std::filesystem::path& path, const SymbolDistribution& dist);

// CSV columns `step,loss_bits,entropy_bits,mi_bound_bits`.
void write_loss_curve_csv(const std::filesystem::path& path,
                          const std::vector<LossCurveRow>& rows);

// "lo:hi:step" or a comma list "a,b,c"; strictly increasing output.
std::vector<double> parse_snr_grid(const std::string& spec);

std::uint64_t fnv1a_hash(const std::string& text);

// Every run writes a manifest next to its outputs: command, resolved config,
// config hash, seed, version.
void write_manifest(const std::filesystem::path& out_dir, const std::string& command,
                    const std::string& config_json, std::uint64_t seed,
                    const std::vector<std::string>& outputs);

// One command owns a run directory at a time.
class RunLock {
public:
    explicit RunLock(const std::filesystem::path& dir);
    ~RunLock();
    RunLock(const RunLock&) = delete;
    RunLock& operator=(const RunLock&) = delete;

private:
    std::filesystem::path lock_path_;
    bool held_ = false;
};

}  // namespace shaping
