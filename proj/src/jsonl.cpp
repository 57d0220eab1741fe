#include <pwab/jsonl.hpp>

#include <fstream>
#include <sstream>

namespace pwab::jsonl {

void for_each_record(const std::filesystem::path& path,
                     const std::function<void(const nlohmann::json&, std::size_t line)>& on_record) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw Error("cannot open " + path.string());
    }
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        if (line.find_first_not_of(" \t") == std::string::npos) {
            continue;
        }
        nlohmann::json record;
        try {
            record = nlohmann::json::parse(line);
        } catch (const nlohmann::json::parse_error& e) {
            throw ParseError(path.string() + ":" + std::to_string(line_no) + ": " + e.what(),
                             line_no, e.byte);
        }
        if (!record.is_object()) {
            throw ParseError(path.string() + ":" + std::to_string(line_no) + ": expected an object",
                             line_no);
        }
        try {
            on_record(record, line_no);
        } catch (const ValidationError&) {
            throw;
        } catch (const ParseError& e) {
            if (e.line() != 0) throw;
            throw ParseError(path.string() + ":" + std::to_string(line_no) + ": " + e.what(),
                             line_no);
        } catch (const nlohmann::json::exception& e) {
            throw ParseError(path.string() + ":" + std::to_string(line_no) + ": " + e.what(),
                             line_no);
        }
    }
}

std::vector<nlohmann::json> read_all(const std::filesystem::path& path) {
    std::vector<nlohmann::json> out;
    for_each_record(path, [&](const nlohmann::json& j, std::size_t) { out.push_back(j); });
    return out;
}

std::string dump_lines(const std::vector<nlohmann::json>& records) {
    std::string out;
    for (const auto& r : records) {
        out += r.dump();
        out += '\n';
    }
    return out;
}

void write_file(const std::filesystem::path& path, const std::string& content) {
    if (path.has_parent_path()) {
        std::filesystem::create_directories(path.parent_path());
    }
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw Error("cannot write " + path.string());
    }
    out << content;
    if (!out) {
        throw Error("write failed for " + path.string());
    }
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw Error("cannot open " + path.string());
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace pwab::jsonl
