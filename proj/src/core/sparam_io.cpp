#include "sparam_io.hpp"

#include <algorithm>
#include <cmath>
#include <regex>
#include <sstream>

namespace hemtfit::sparam {

namespace {

std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
    return s;
}

// Lowercase and strip spaces/dots: "S11 Magn." -> "s11magn".
std::string normalize_token(const std::string& s) {
    std::string out;
    for (char c : s)
        if (c != ' ' && c != '.' && c != '\t') out += static_cast<char>(std::tolower(c));
    return out;
}

std::vector<std::string> split(const std::string& line, char delim) {
    std::vector<std::string> cells;
    if (delim == ' ') {
        std::istringstream in(line);
        std::string tok;
        while (in >> tok) cells.push_back(tok);
        return cells;
    }
    std::string cur;
    for (char c : line) {
        if (c == delim) {
            cells.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    cells.push_back(cur);
    return cells;
}

double freq_unit_factor(const std::string& unit, std::size_t line_no) {
    const std::string u = lower(unit);
    if (u == "hz") return 1.0;
    if (u == "khz") return 1e3;
    if (u == "mhz") return 1e6;
    if (u == "ghz") return 1e9;
    throw ParseError("unknown frequency unit '" + unit + "'", line_no);
}

struct ColumnRole {
    enum Kind { Freq, Mag, Angle } kind;
    SIndex param = kS11; // for Mag/Angle
};

std::optional<SIndex> parse_sindex(char p1, char p2) {
    if (p1 == '1' && p2 == '1') return kS11;
    if (p1 == '2' && p2 == '1') return kS21;
    if (p1 == '1' && p2 == '2') return kS12;
    if (p1 == '2' && p2 == '2') return kS22;
    return {};
}

void scan_bias_line(const std::string& line, BiasMetadata& bias) {
    static const std::regex ta_re(R"(ta\s*=\s*([-+0-9.eE]+)\s*deg)", std::regex::icase);
    static const std::regex vds_re(R"(vds\s*=\s*([-+0-9.eE]+)\s*v?)", std::regex::icase);
    static const std::regex id_re(R"(id\s*=\s*([-+0-9.eE]+)\s*(ma|a)?)", std::regex::icase);
    std::smatch m;
    if (std::regex_search(line, m, ta_re)) bias.temperature_c = parse_double(m[1]);
    if (std::regex_search(line, m, vds_re)) bias.vds = parse_double(m[1]);
    if (std::regex_search(line, m, id_re)) {
        double v = parse_double(m[1]);
        if (lower(m[2]) == "ma") v *= 1e-3;
        bias.id = v;
    }
}

} // namespace

BiasMetadata scan_bias_text(const std::string& text) {
    BiasMetadata bias;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) scan_bias_line(line, bias);
    return bias;
}

std::pair<std::vector<STableRow>, BiasMetadata> parse_table(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    std::size_t line_no = 0;

    BiasMetadata bias;
    std::vector<ColumnRole> roles;
    double freq_factor = 1.0;
    char delim = ',';
    bool header_seen = false;
    std::vector<STableRow> rows;

    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.find_first_not_of(" \t") == std::string::npos) continue;

        if (!header_seen) {
            // Try this line as the header; anything before it is title
            // text that may carry bias conditions.
            delim = line.find('\t') != std::string::npos  ? '\t'
                    : line.find(',') != std::string::npos ? ','
                                                          : ' ';
            const auto cells = split(line, delim);
            const std::string first = normalize_token(cells.empty() ? "" : cells[0]);
            static const std::regex freq_re(R"(^(f|freq|frequency)(\(([a-z]+)\))?$)");
            std::smatch fm;
            if (!std::regex_match(first, fm, freq_re)) {
                scan_bias_line(line, bias);
                continue;
            }
            freq_factor = fm[3].matched ? freq_unit_factor(fm[3], line_no) : 1.0;
            roles.push_back({ColumnRole::Freq, kS11});

            std::optional<SIndex> pending; // bare "S11" awaiting Magn./Angle columns
            bool pending_mag_done = false;
            static const std::regex s_re(R"(^s([12])([12])(m|mag|magn|a|ang|angle)?$)");
            for (std::size_t c = 1; c < cells.size(); ++c) {
                const std::string tok = normalize_token(cells[c]);
                if (tok.empty()) continue;
                std::smatch sm;
                if (std::regex_match(tok, sm, s_re)) {
                    const auto idx = parse_sindex(*sm[1].first, *sm[2].first);
                    if (!idx) throw ParseError("unknown column '" + cells[c] + "'", line_no);
                    if (sm[3].matched) {
                        const char suffix = *sm[3].first;
                        roles.push_back({suffix == 'a' ? ColumnRole::Angle : ColumnRole::Mag, *idx});
                    } else {
                        pending = idx;
                        pending_mag_done = false;
                    }
                    continue;
                }
                if (tok == "m" || tok == "mag" || tok == "magn") {
                    if (!pending) throw ParseError("magnitude column without a parameter", line_no);
                    roles.push_back({ColumnRole::Mag, *pending});
                    pending_mag_done = true;
                    continue;
                }
                if (tok == "a" || tok == "ang" || tok == "angle" || tok == "phase") {
                    if (!pending || !pending_mag_done)
                        throw ParseError("angle column without a parameter", line_no);
                    roles.push_back({ColumnRole::Angle, *pending});
                    pending.reset();
                    continue;
                }
                throw ParseError("unknown column '" + cells[c] + "'", line_no);
            }
            if (roles.size() < 2) throw ParseError("table has no S-parameter columns", line_no);
            header_seen = true;
            continue;
        }

        const auto cells = split(line, delim);
        if (cells.size() < roles.size())
            throw ParseError("expected " + std::to_string(roles.size()) + " fields", line_no);
        STableRow row;
        std::array<std::optional<double>, 4> mags, angles;
        for (std::size_t c = 0; c < roles.size(); ++c) {
            double v;
            try {
                v = parse_double(cells[c]);
            } catch (const ParseError& e) {
                throw ParseError(std::string(e.what()), line_no);
            }
            switch (roles[c].kind) {
                case ColumnRole::Freq: row.freq_hz = v * freq_factor; break;
                case ColumnRole::Mag: mags[roles[c].param] = v; break;
                case ColumnRole::Angle: angles[roles[c].param] = v; break;
            }
        }
        for (unsigned i = 0; i < 4; ++i) {
            if (!mags[i] && !angles[i]) continue;
            if (!mags[i] || !angles[i])
                throw ParseError("magnitude/angle pair incomplete for an S column", line_no);
            if (*mags[i] < 0.0) throw ParseError("negative magnitude", line_no);
            if (!(*angles[i] > -360.0 && *angles[i] < 360.0))
                throw ParseError("angle out of (-360, 360)", line_no);
            row.s[i] = STableRow::Polar{*mags[i], *angles[i]};
        }
        if (!(row.freq_hz > 0.0)) throw ParseError("frequency must be > 0", line_no);
        if (!rows.empty() && !(row.freq_hz > rows.back().freq_hz))
            throw ParseError("frequencies must be strictly ascending", line_no);
        rows.push_back(row);
    }
    if (!header_seen) throw ParseError("no table header found");
    return {std::move(rows), bias};
}

Complex polar_to_complex(double mag, double angle_deg) {
    const double a = angle_deg * M_PI / 180.0;
    return {mag * std::cos(a), mag * std::sin(a)};
}

SParamDataset to_sparam_dataset(const std::vector<STableRow>& rows, const BiasMetadata& bias) {
    if (rows.empty()) throw Error("no S-parameter rows");
    SParamDataset ds;
    ds.bias = bias;
    ds.entries.reserve(rows.size());
    for (const auto& r : rows) {
        SParamEntry e;
        e.freq_hz = r.freq_hz;
        e.mask = 0;
        for (unsigned i = 0; i < 4; ++i) {
            if (!r.s[i]) continue;
            e.s[i] = polar_to_complex(r.s[i]->mag, r.s[i]->angle_deg);
            e.mask |= 1u << i;
        }
        ds.entries.push_back(e);
    }
    ds.validate();
    return ds;
}

SParamDataset read_touchstone(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    std::size_t line_no = 0;

    bool option_seen = false;
    TouchstoneFormat fmt = TouchstoneFormat::MA;
    double freq_factor = 1e9;
    double z0 = 50.0;
    SParamDataset ds;

    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (auto bang = line.find('!'); bang != std::string::npos) line.erase(bang);
        const auto cells = split(line, ' ');
        if (cells.empty()) continue;

        if (cells[0] == "#") {
            if (option_seen) throw ParseError("duplicate option line", line_no);
            // `# <unit> <param> <fmt> R <z0>`, tokens case-insensitive.
            if (cells.size() < 4) throw ParseError("malformed option line", line_no);
            freq_factor = freq_unit_factor(cells[1], line_no);
            if (lower(cells[2]) != "s")
                throw ParseError("only S-parameter Touchstone files are supported", line_no);
            const std::string f = lower(cells[3]);
            if (f == "ma")
                fmt = TouchstoneFormat::MA;
            else if (f == "ri")
                fmt = TouchstoneFormat::RI;
            else
                throw ParseError("unsupported Touchstone format '" + cells[3] + "'", line_no);
            if (cells.size() >= 6) {
                if (lower(cells[4]) != "r") throw ParseError("malformed option line", line_no);
                z0 = parse_double(cells[5]);
            } else if (cells.size() != 4) {
                throw ParseError("malformed option line", line_no);
            }
            option_seen = true;
            continue;
        }

        if (!option_seen) throw ParseError("data before option line", line_no);
        if (cells.size() != 9)
            throw ParseError("expected 9 columns for a 2-port record, got " +
                                 std::to_string(cells.size()),
                             line_no);
        std::array<double, 9> v{};
        for (std::size_t i = 0; i < 9; ++i) {
            try {
                v[i] = parse_double(cells[i]);
            } catch (const ParseError& e) {
                throw ParseError(std::string(e.what()), line_no);
            }
        }
        SParamEntry e;
        e.freq_hz = v[0] * freq_factor;
        for (unsigned i = 0; i < 4; ++i) {
            const double a = v[1 + 2 * i], b = v[2 + 2 * i];
            e.s[i] = fmt == TouchstoneFormat::MA ? polar_to_complex(a, b) : Complex(a, b);
        }
        e.mask = kMaskAll;
        if (!ds.entries.empty() && !(e.freq_hz > ds.entries.back().freq_hz))
            throw ParseError("frequencies must be strictly ascending", line_no);
        ds.entries.push_back(e);
    }
    if (!option_seen) throw ParseError("missing Touchstone option line");
    if (ds.entries.empty()) throw ParseError("Touchstone file has no data");
    (void)z0; // reference impedance is fixed at 50 ohm downstream
    ds.validate();
    return ds;
}

std::string write_touchstone(const SParamDataset& ds, TouchstoneFormat fmt) {
    if (ds.entries.empty()) throw Error("nothing to write");
    for (const auto& e : ds.entries)
        if (e.mask != kMaskAll)
            throw Error("Touchstone cannot represent partially masked data");
    std::string out = fmt == TouchstoneFormat::MA ? "# GHz S MA R 50\n" : "# GHz S RI R 50\n";
    for (const auto& e : ds.entries) {
        out += fmt_double(e.freq_hz / 1e9);
        for (unsigned i = 0; i < 4; ++i) {
            if (fmt == TouchstoneFormat::MA) {
                out += " " + fmt_double(std::abs(e.s[i]));
                out += " " + fmt_double(std::arg(e.s[i]) * 180.0 / M_PI);
            } else {
                out += " " + fmt_double(e.s[i].real());
                out += " " + fmt_double(e.s[i].imag());
            }
        }
        out += "\n";
    }
    return out;
}

std::string write_canonical_csv(const SParamDataset& ds) {
    std::string out;
    if (ds.bias.vds) out += "# vds=" + fmt_double(*ds.bias.vds) + "\n";
    if (ds.bias.id) out += "# id_a=" + fmt_double(*ds.bias.id) + "\n";
    if (ds.bias.temperature_c) out += "# temperature_c=" + fmt_double(*ds.bias.temperature_c) + "\n";
    out += "freq_hz,s11_re,s11_im,s21_re,s21_im,s12_re,s12_im,s22_re,s22_im,mask_bits\n";
    for (const auto& e : ds.entries) {
        out += fmt_double(e.freq_hz);
        for (unsigned i = 0; i < 4; ++i)
            out += "," + fmt_double(e.s[i].real()) + "," + fmt_double(e.s[i].imag());
        out += "," + std::to_string(e.mask) + "\n";
    }
    return out;
}

SParamDataset read_canonical_csv(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    std::size_t line_no = 0;
    SParamDataset ds;
    bool header_seen = false;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (line[0] == '#') {
            static const std::regex kv_re(R"(#\s*(\w+)\s*=\s*([-+0-9.eE]+))");
            std::smatch m;
            if (std::regex_match(line, m, kv_re)) {
                const std::string key = m[1];
                if (key == "vds") ds.bias.vds = parse_double(m[2]);
                if (key == "id_a") ds.bias.id = parse_double(m[2]);
                if (key == "temperature_c") ds.bias.temperature_c = parse_double(m[2]);
            }
            continue;
        }
        if (!header_seen) {
            if (normalize_token(split(line, ',')[0]) != "freq_hz")
                throw ParseError("expected canonical CSV header", line_no);
            header_seen = true;
            continue;
        }
        const auto cells = split(line, ',');
        if (cells.size() != 10) throw ParseError("expected 10 fields", line_no);
        SParamEntry e;
        e.freq_hz = parse_double(cells[0]);
        for (unsigned i = 0; i < 4; ++i)
            e.s[i] = Complex(parse_double(cells[1 + 2 * i]), parse_double(cells[2 + 2 * i]));
        const long mask = std::strtol(cells[9].c_str(), nullptr, 10);
        if (mask < 0 || mask > 15) throw ParseError("mask_bits out of range", line_no);
        e.mask = static_cast<unsigned>(mask);
        ds.entries.push_back(e);
    }
    if (!header_seen) throw ParseError("expected canonical CSV header");
    ds.validate();
    return ds;
}

SParamDataset load_sparam_file(const std::string& path) {
    const std::string text = read_text_file(path);
    if (text.find("freq_hz,s11_re") != std::string::npos) return read_canonical_csv(text);
    // Touchstone: first non-comment, non-blank line is the option line.
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        const auto start = line.find_first_not_of(" \t\r");
        if (start == std::string::npos || line[start] == '!') continue;
        if (line[start] == '#') return read_touchstone(text);
        break;
    }
    auto [rows, bias] = parse_table(text);
    return to_sparam_dataset(rows, bias);
}

} // namespace hemtfit::sparam
