#include <fstream>
#include <map>
#include <sstream>

#include "pcps/sketch.hpp"

namespace pcps {

namespace {

struct Field {
    const char* key;
    double CalibConstants::* member;
};

constexpr Field kFields[] = {
    {"dense_jl", &CalibConstants::dense_jl},
    {"sparse_embedding", &CalibConstants::sparse_embedding},
    {"osnap", &CalibConstants::osnap},
    {"osnap_sparsity", &CalibConstants::osnap_sparsity},
    {"sampling", &CalibConstants::sampling},
    {"bss", &CalibConstants::bss},
    {"logk", &CalibConstants::logk},
    {"residual_jl", &CalibConstants::residual_jl},
    {"nonoblivious_eps", &CalibConstants::nonoblivious_eps},
    {"nonoblivious_cal", &CalibConstants::nonoblivious_cal},
    {"stream", &CalibConstants::stream},
};

}  // namespace

CalibConstants CalibConstants::load_or_default(const std::string& path) {
    CalibConstants cc;
    std::ifstream in(path);
    if (!in) return cc;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) continue;
        const std::string key = line.substr(0, eq);
        const double value = std::strtod(line.c_str() + eq + 1, nullptr);
        if (value <= 0.0) continue;
        for (const Field& f : kFields)
            if (key == f.key) cc.*(f.member) = value;
    }
    return cc;
}

void CalibConstants::save(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write constants file: " + path);
    out << "# calibration multipliers for sketch dimension formulas\n";
    for (const Field& f : kFields) out << f.key << "=" << this->*(f.member) << "\n";
}

}  // namespace pcps
