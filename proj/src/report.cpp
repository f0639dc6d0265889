#include "canard/report.hpp"

#include <cstdio>
#include <istream>
#include <ostream>

#include "canard/errors.hpp"

namespace canard {

std::string format_double(double value) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", value);
    return buf;
}

void Report::add(const std::string& key, double value) { entries_.emplace_back(key, format_double(value)); }

void Report::add(const std::string& key, int value) { entries_.emplace_back(key, std::to_string(value)); }

void Report::add(const std::string& key, const std::string& value) { entries_.emplace_back(key, value); }

void Report::add(const std::string& key, bool value) { entries_.emplace_back(key, value ? "true" : "false"); }

std::optional<std::string> Report::get(const std::string& key) const {
    for (const auto& [k, v] : entries_) {
        if (k == key) return v;
    }
    return std::nullopt;
}

double Report::get_double(const std::string& key) const {
    const auto v = get(key);
    if (!v) throw ValidationError("report has no key '" + key + "'");
    try {
        return std::stod(*v);
    } catch (const std::exception&) {
        throw ValidationError("report value for '" + key + "' is not a number: " + *v);
    }
}

void Report::write(std::ostream& out) const {
    for (const auto& [k, v] : entries_) out << k << " = " << v << '\n';
}

Report Report::parse(std::istream& in) {
    Report r;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        const auto eq = line.find(" = ");
        if (eq == std::string::npos) {
            throw ValidationError("malformed report line: " + line);
        }
        r.entries_.emplace_back(line.substr(0, eq), line.substr(eq + 3));
    }
    return r;
}

}  // namespace canard
