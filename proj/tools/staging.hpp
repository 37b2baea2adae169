#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace minerdr::cli {

/// Collects a command's artifacts in a scratch directory under `out` and
/// moves them into place only on commit(); otherwise nothing is left behind.
class Staging {
public:
    Staging(std::filesystem::path out, const std::string& command);
    ~Staging();
    Staging(const Staging&) = delete;
    Staging& operator=(const Staging&) = delete;

    /// Path for artifact `name` (relative, may contain subdirectories).
    [[nodiscard]] std::filesystem::path path(const std::string& name);
    void write(const std::string& name, const std::string& content);
    void commit();

private:
    std::filesystem::path out_;
    std::filesystem::path scratch_;
    std::vector<std::string> names_;
};

}  // namespace minerdr::cli
