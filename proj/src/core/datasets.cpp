#include "datasets.hpp"

#include <fstream>
#include <sstream>

namespace hemtfit {

void SParamDataset::validate() const {
    for (std::size_t i = 0; i < entries.size(); ++i) {
        if (!(entries[i].freq_hz > 0.0)) throw Error("S-parameter frequency must be > 0");
        if (i > 0 && !(entries[i].freq_hz > entries[i - 1].freq_hz))
            throw Error("S-parameter frequencies must be strictly ascending");
    }
}

std::string iv_to_csv(const IVDataset& ds) {
    std::string out = "vgs,vds,id\n";
    for (const auto& r : ds.rows)
        out += fmt_double(r.vgs) + "," + fmt_double(r.vds) + "," + fmt_double(r.id) + "\n";
    return out;
}

IVDataset iv_from_csv(const std::string& text) {
    IVDataset ds;
    std::istringstream in(text);
    std::string line;
    std::size_t line_no = 0;
    bool saw_header = false;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (!saw_header) {
            // Header row is required but tolerated in any case.
            saw_header = true;
            continue;
        }
        std::istringstream cells(line);
        std::string c1, c2, c3;
        if (!std::getline(cells, c1, ',') || !std::getline(cells, c2, ',') ||
            !std::getline(cells, c3, ','))
            throw ParseError("expected 3 comma-separated fields", line_no);
        IVRow r;
        r.vgs = parse_double(c1);
        r.vds = parse_double(c2);
        r.id = parse_double(c3);
        ds.rows.push_back(r);
    }
    return ds;
}

void write_iv_csv(const IVDataset& ds, const std::string& path) {
    write_text_file(path, iv_to_csv(ds));
}

IVDataset read_iv_csv(const std::string& path) { return iv_from_csv(read_text_file(path)); }

std::string read_text_file(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw Error("cannot open '" + path + "'");
    std::ostringstream out;
    out << f.rdbuf();
    return out.str();
}

void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw Error("cannot open '" + path + "' for writing");
    f << content;
    if (!f.good()) throw Error("failed writing '" + path + "'");
}

} // namespace hemtfit
