#include "netlist.hpp"

#include <array>
#include <sstream>

namespace hemtfit::netlist {

namespace {

constexpr const char* kIntrinsicModel = "hemtfit_core";

void validate_name(const std::string& name) {
    if (name.empty()) throw std::invalid_argument("device name must be nonempty");
    for (char c : name)
        if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-' || c == '.'))
            throw std::invalid_argument("device name has characters a netlist cannot carry: '" +
                                        name + "'");
}

std::vector<std::string> tokens_of(const std::string& line) {
    std::vector<std::string> toks;
    std::istringstream in(line);
    std::string t;
    while (in >> t) toks.push_back(t);
    return toks;
}

// "KEY=1.23e+00" -> value, enforcing the expected key.
double parse_kv(const std::string& tok, const std::string& key, std::size_t line_no) {
    const auto eq = tok.find('=');
    if (eq == std::string::npos || tok.substr(0, eq) != key)
        throw ParseError("expected '" + key + "=<value>', got '" + tok + "'", line_no);
    return parse_double(tok.substr(eq + 1));
}

} // namespace

void FitReport::validate() const {
    if (iv_nrmse_pct < 0.0 || (s_nrmse_pct && *s_nrmse_pct < 0.0) || iterations < 0)
        throw std::invalid_argument("fit report fields must be nonnegative");
}

std::string emit_netlist(const ModelCard& card, bool asm_names, bool full_precision) {
    validate_name(card.device_name);
    card.fit.validate();
    const auto& dc = card.dc;
    const auto& rf = card.rf;
    auto e = [full_precision](double v) {
        return full_precision ? fmt_double(v) : fmt_double_sci9(v);
    };

    std::string out;
    out += "* hemtfit model card\n";
    out += "* device: " + card.device_name + "\n";
    out += "* fit: iv_nrmse_pct=" + e(card.fit.iv_nrmse_pct) + " s_nrmse_pct=" +
           (card.fit.s_nrmse_pct ? e(*card.fit.s_nrmse_pct) : std::string("n/a")) +
           " iterations=" + std::to_string(card.fit.iterations) + "\n";
    out += ".subckt " + card.device_name + " g d s\n";
    out += "LG g g1 " + e(rf.lg) + "\n";
    out += "RG g1 gi " + e(rf.rg) + "\n";
    out += "LD d d1 " + e(rf.ld) + "\n";
    out += "RD d1 di " + e(rf.rd) + "\n";
    out += "LS s s1 " + e(rf.ls) + "\n";
    out += "RS s1 si " + e(rf.rs) + "\n";
    out += "CPG g 0 " + e(rf.cpg) + "\n";
    out += "CPD d 0 " + e(rf.cpd) + "\n";
    out += std::string("NI gi di si ") + kIntrinsicModel + " GM=" + e(rf.gm) + " TAU=" +
           e(rf.tau) + " GDS=" + e(rf.gds) + " CGS=" + e(rf.cgs) + " CGD=" + e(rf.cgd) +
           " CDS=" + e(rf.cds) + " RI=" + e(rf.ri) + "\n";
    out += std::string(".model ") + kIntrinsicModel + " hemtfit VOFF=" + e(dc.voff) +
           " NFACTOR=" + e(dc.nfactor) + " KGAIN=" + e(dc.kgain) + " UA=" + e(dc.ua) + " UB=" +
           e(dc.ub) + " DELTA=" + e(dc.delta) + " LAMBDA=" + e(dc.lambda) + " RSC=" + e(dc.rsc) +
           " RDC=" + e(dc.rdc) + "\n";
    out += ".ends " + card.device_name + "\n";

    if (asm_names) {
        out += "* ASM-HEMT-style card for the directly mappable parameters;\n";
        out += "* uncomment if the licensed model is installed.\n";
        out += "* .model " + card.device_name + "_asm asmhemt VOFF=" + e(dc.voff) + " LAMBDA=" +
               e(dc.lambda) + " RSC=" + e(dc.rsc) + " RDC=" + e(dc.rdc) + "\n";
    }
    return out;
}

ModelCard parse_netlist(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    std::size_t line_no = 0;
    ModelCard card;
    bool have_device = false, have_fit = false;

    // Pull the two required header comments; any other comment is noise.
    std::vector<std::pair<std::size_t, std::string>> body;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.find_first_not_of(" \t") == std::string::npos) continue;
        if (line[0] == '*') {
            const auto toks = tokens_of(line);
            if (toks.size() >= 3 && toks[1] == "device:") {
                card.device_name = toks[2];
                have_device = true;
            } else if (toks.size() >= 5 && toks[1] == "fit:") {
                card.fit.iv_nrmse_pct = parse_kv(toks[2], "iv_nrmse_pct", line_no);
                if (toks[3] == "s_nrmse_pct=n/a")
                    card.fit.s_nrmse_pct.reset();
                else
                    card.fit.s_nrmse_pct = parse_kv(toks[3], "s_nrmse_pct", line_no);
                const auto eq = toks[4].find('=');
                if (eq == std::string::npos || toks[4].substr(0, eq) != "iterations")
                    throw ParseError("expected 'iterations=<n>'", line_no);
                card.fit.iterations = std::stol(toks[4].substr(eq + 1));
                have_fit = true;
            }
            continue;
        }
        body.emplace_back(line_no, line);
    }
    if (!have_device) throw ParseError("missing '* device:' header");
    if (!have_fit) throw ParseError("missing '* fit:' header");

    // Fixed schema: .subckt, 8 passives, intrinsic instance, .model, .ends.
    std::size_t i = 0;
    auto next_line = [&](const char* what) -> std::pair<std::size_t, std::vector<std::string>> {
        if (i >= body.size()) throw ParseError(std::string("unexpected end, expected ") + what);
        auto [no, text_line] = body[i++];
        return {no, tokens_of(text_line)};
    };
    auto expect_element = [&](const char* name, const char* n1, const char* n2) -> double {
        auto [no, toks] = next_line(name);
        if (toks.size() != 4 || toks[0] != name || toks[1] != n1 || toks[2] != n2)
            throw ParseError(std::string("expected '") + name + " " + n1 + " " + n2 +
                                 " <value>', got '" + toks[0] + " ...'",
                             no);
        return parse_double(toks[3]);
    };

    {
        auto [no, toks] = next_line(".subckt");
        if (toks.size() != 5 || toks[0] != ".subckt" || toks[2] != "g" || toks[3] != "d" ||
            toks[4] != "s")
            throw ParseError("expected '.subckt <name> g d s'", no);
        if (toks[1] != card.device_name)
            throw ParseError("subckt name does not match the device header", no);
    }
    auto& rf = card.rf;
    rf.lg = expect_element("LG", "g", "g1");
    rf.rg = expect_element("RG", "g1", "gi");
    rf.ld = expect_element("LD", "d", "d1");
    rf.rd = expect_element("RD", "d1", "di");
    rf.ls = expect_element("LS", "s", "s1");
    rf.rs = expect_element("RS", "s1", "si");
    rf.cpg = expect_element("CPG", "g", "0");
    rf.cpd = expect_element("CPD", "d", "0");
    {
        auto [no, toks] = next_line("NI");
        if (toks.size() != 12 || toks[0] != "NI" || toks[1] != "gi" || toks[2] != "di" ||
            toks[3] != "si" || toks[4] != kIntrinsicModel)
            throw ParseError("expected 'NI gi di si " + std::string(kIntrinsicModel) +
                                 " <params...>'",
                             no);
        rf.gm = parse_kv(toks[5], "GM", no);
        rf.tau = parse_kv(toks[6], "TAU", no);
        rf.gds = parse_kv(toks[7], "GDS", no);
        rf.cgs = parse_kv(toks[8], "CGS", no);
        rf.cgd = parse_kv(toks[9], "CGD", no);
        rf.cds = parse_kv(toks[10], "CDS", no);
        rf.ri = parse_kv(toks[11], "RI", no);
    }
    {
        auto [no, toks] = next_line(".model");
        if (toks.size() != 12 || toks[0] != ".model" || toks[1] != kIntrinsicModel ||
            toks[2] != "hemtfit")
            throw ParseError("expected '.model " + std::string(kIntrinsicModel) +
                                 " hemtfit <params...>'",
                             no);
        auto& dc = card.dc;
        dc.voff = parse_kv(toks[3], "VOFF", no);
        dc.nfactor = parse_kv(toks[4], "NFACTOR", no);
        dc.kgain = parse_kv(toks[5], "KGAIN", no);
        dc.ua = parse_kv(toks[6], "UA", no);
        dc.ub = parse_kv(toks[7], "UB", no);
        dc.delta = parse_kv(toks[8], "DELTA", no);
        dc.lambda = parse_kv(toks[9], "LAMBDA", no);
        dc.rsc = parse_kv(toks[10], "RSC", no);
        dc.rdc = parse_kv(toks[11], "RDC", no);
    }
    {
        auto [no, toks] = next_line(".ends");
        if (toks.size() != 2 || toks[0] != ".ends" || toks[1] != card.device_name)
            throw ParseError("expected '.ends " + card.device_name + "'", no);
    }
    if (i != body.size())
        throw ParseError("unexpected trailing content", body[i].first);
    return card;
}

void write_netlist(const ModelCard& card, const std::string& path, bool asm_names) {
    write_text_file(path, emit_netlist(card, asm_names));
}

ModelCard read_netlist(const std::string& path) { return parse_netlist(read_text_file(path)); }

} // namespace hemtfit::netlist
