#pragma once

#include <string>
#include <vector>

#include "multiauto/memory_material.hpp"
#include "multiauto/sequence_limits.hpp"
#include "multiauto/volterra.hpp"

namespace multiauto {

// Flat key-value experiment configuration with [section] headers.
//
//   # comment
//   [experiment]
//   kind = aa_test
//   seed = 42
//
// Values run to the end of the line. Sections and keys must be unique;
// every key must be consumed by the experiment (unknown keys are hard
// errors). parse(print()) reproduces the structure exactly.
class Config {
public:
    static Config parse(const std::string& text);
    std::string print() const;

    bool has_section(const std::string& section) const;
    bool has(const std::string& section, const std::string& key) const;
    const std::string& get(const std::string& section, const std::string& key) const;
    std::string get_or(const std::string& section, const std::string& key, const std::string& def) const;
    double num(const std::string& section, const std::string& key) const;
    double num_or(const std::string& section, const std::string& key, double def) const;
    long integer_or(const std::string& section, const std::string& key, long def) const;
    std::vector<double> nums(const std::string& section, const std::string& key) const;

    std::vector<std::string> unused() const; // "section.key" of keys never read

private:
    struct Entry {
        std::string section, key, value;
        mutable bool used = false;
    };
    std::vector<Entry> entries_;
    const Entry* find(const std::string& section, const std::string& key) const;
};

// Section-to-object builders shared by the CLI and tests.
FunctionExpr function_from(const Config& c, const std::string& section);
SequenceFamily family_from(const Config& c, const std::string& section);
KernelSpec kernel_from(const Config& c, const std::string& section);
GridWindow window_from(const Config& c, const std::string& section);
DomainDescriptor domain_from(const Config& c, const std::string& section);
QuadratureScheme quad_from(const Config& c, const std::string& section);
LimitProbe probe_from(const Config& c, const std::string& probe_section,
                      const std::string& family_section);
MemorySystem memory_system_from(const Config& c, const std::string& section);

} // namespace multiauto
