#include "staging.hpp"

#include <fstream>
#include <system_error>

#include <unistd.h>

#include "minerdr/error.hpp"

namespace fs = std::filesystem;

namespace minerdr::cli {

Staging::Staging(fs::path out, const std::string& command) : out_(std::move(out)) {
    std::error_code ec;
    fs::create_directories(out_, ec);
    if (ec) throw DataError("cannot create output directory " + out_.string() + ": " + ec.message());
    scratch_ = out_ / (".partial-" + command + "-" + std::to_string(::getpid()));
    fs::remove_all(scratch_, ec);
    fs::create_directories(scratch_, ec);
    if (ec) throw DataError("cannot create " + scratch_.string() + ": " + ec.message());
}

Staging::~Staging() {
    std::error_code ec;
    fs::remove_all(scratch_, ec);
}

fs::path Staging::path(const std::string& name) {
    names_.push_back(name);
    auto p = scratch_ / name;
    fs::create_directories(p.parent_path());
    return p;
}

void Staging::write(const std::string& name, const std::string& content) {
    auto p = path(name);
    std::ofstream f(p, std::ios::binary);
    f << content;
    if (!f) throw DataError("cannot write " + p.string());
}

void Staging::commit() {
    for (const auto& name : names_) {
        auto target = out_ / name;
        fs::create_directories(target.parent_path());
        fs::rename(scratch_ / name, target);
    }
}

}  // namespace minerdr::cli
