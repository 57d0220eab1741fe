#pragma once

#include <pwab/corpus.hpp>

#include <atomic>
#include <filesystem>
#include <fstream>
#include <string>
#include <unistd.h>

namespace pwab::test {

inline corpus::Product product(std::string id, std::string title, std::string category = "Electronics",
                               std::optional<double> price = 10.0) {
    corpus::Product p;
    p.product_id = std::move(id);
    p.title = std::move(title);
    p.category = std::move(category);
    p.price = price;
    p.store = "Store";
    p.average_rating = 4.0;
    p.rating_count = 3;
    return p;
}

inline corpus::BehaviorRecord behavior(std::int64_t ts, std::string id, double rating = 5.0,
                                       std::string text = "fine") {
    return {ts, std::move(id), rating, "title", std::move(text)};
}

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
public:
    TempDir() {
        static std::atomic<int> counter{0};
        path_ = std::filesystem::temp_directory_path() /
                ("pwab_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
        std::filesystem::remove_all(path_);
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    const std::filesystem::path& path() const { return path_; }
    std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

private:
    std::filesystem::path path_;
};

inline void write_text(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    out << text;
}

}  // namespace pwab::test
