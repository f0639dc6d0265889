#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace canard {

// Ordered "key = value" records; doubles are written with 17 significant
// digits so that parsing recovers them exactly.
class Report {
public:
    void add(const std::string& key, double value);
    void add(const std::string& key, int value);
    void add(const std::string& key, const std::string& value);
    void add(const std::string& key, const char* value) { add(key, std::string(value)); }
    void add(const std::string& key, bool value);

    std::optional<std::string> get(const std::string& key) const;
    double get_double(const std::string& key) const;

    const std::vector<std::pair<std::string, std::string>>& entries() const { return entries_; }

    void write(std::ostream& out) const;

    // Lines starting with '#' and blank lines are skipped.
    static Report parse(std::istream& in);

private:
    std::vector<std::pair<std::string, std::string>> entries_;
};

std::string format_double(double value);

}  // namespace canard
