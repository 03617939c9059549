#pragma once

#include <stdexcept>
#include <string>

namespace lachesis {

struct domain_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct duplicate_scan_error : domain_error {
    explicit duplicate_scan_error(const std::string& dataset)
        : domain_error("duplicate scan nodes for dataset '" + dataset + "'") {}
};

struct path_explosion_error : domain_error {
    explicit path_explosion_error(std::size_t cap)
        : domain_error("path enumeration exceeded cap of " + std::to_string(cap)) {}
};

struct absent_scan_error : domain_error {
    explicit absent_scan_error(const std::string& dataset)
        : domain_error("graph has no scan node for dataset '" + dataset + "'") {}
};

struct unknown_ir_error : domain_error {
    explicit unknown_ir_error(const std::string& ir_id)
        : domain_error("execution record references unregistered IR '" + ir_id + "'") {}
};

struct degenerate_variance_error : domain_error {
    degenerate_variance_error() : domain_error("series has zero variance") {}
};

struct dimension_mismatch_error : domain_error {
    using domain_error::domain_error;
};

struct empty_window_error : domain_error {
    empty_window_error() : domain_error("reward window is empty") {}
};

struct non_finite_gradient_error : domain_error {
    non_finite_gradient_error() : domain_error("non-finite gradient; update aborted") {}
};

struct checkpoint_error : domain_error {
    using domain_error::domain_error;
};

struct missing_table_entry_error : domain_error {
    explicit missing_table_entry_error(const std::string& key)
        : domain_error("latency table has no entry for '" + key + "'") {}
};

struct format_error : domain_error {
    using domain_error::domain_error;
};

}  // namespace lachesis
