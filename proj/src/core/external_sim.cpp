#include "external_sim.hpp"

#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <atomic>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <sstream>

namespace hemtfit::extsim {

namespace fs = std::filesystem;

ProcessResult run_process(const std::string& command, double timeout_s) {
    int pipefd[2];
    if (pipe(pipefd) != 0) throw SpawnError("pipe() failed");

    const pid_t pid = fork();
    if (pid < 0) {
        close(pipefd[0]);
        close(pipefd[1]);
        throw SpawnError("fork() failed");
    }
    if (pid == 0) {
        // child: own process group so a timeout can kill the whole tree
        setpgid(0, 0);
        dup2(pipefd[1], STDOUT_FILENO);
        close(pipefd[0]);
        close(pipefd[1]);
        execl("/bin/sh", "sh", "-c", command.c_str(), static_cast<char*>(nullptr));
        _exit(127);
    }

    close(pipefd[1]);
    ProcessResult result;
    const auto deadline =
        std::chrono::steady_clock::now() + std::chrono::duration<double>(timeout_s);
    char buf[4096];
    bool open = true;
    while (open) {
        const auto remaining = std::chrono::duration_cast<std::chrono::milliseconds>(
                                   deadline - std::chrono::steady_clock::now())
                                   .count();
        if (remaining <= 0) {
            result.timed_out = true;
            kill(-pid, SIGKILL);
            kill(pid, SIGKILL);
            break;
        }
        struct pollfd pfd = {pipefd[0], POLLIN, 0};
        const int pr = poll(&pfd, 1, static_cast<int>(std::min<long long>(remaining, 1000)));
        if (pr < 0) {
            if (errno == EINTR) continue;
            break;
        }
        if (pr == 0) continue;
        const ssize_t n = read(pipefd[0], buf, sizeof(buf));
        if (n <= 0)
            open = false;
        else
            result.stdout_text.append(buf, static_cast<std::size_t>(n));
    }
    close(pipefd[0]);

    int status = 0;
    waitpid(pid, &status, 0);
    if (WIFEXITED(status))
        result.exit_code = WEXITSTATUS(status);
    else if (WIFSIGNALED(status))
        result.exit_code = 128 + WTERMSIG(status);
    return result;
}

std::vector<std::vector<double>> parse_sim_table(const std::string& text, std::size_t columns) {
    std::vector<std::vector<double>> rows;
    std::istringstream in(text);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        std::istringstream cells(line);
        std::vector<double> row;
        std::string tok;
        while (cells >> tok) {
            try {
                row.push_back(parse_double(tok));
            } catch (const ParseError&) {
                throw OutputParseError("simulator output line " + std::to_string(line_no) +
                                       ": bad numeric field '" + tok + "'");
            }
        }
        if (row.empty()) continue;
        if (row.size() != columns)
            throw OutputParseError("simulator output line " + std::to_string(line_no) +
                                   ": expected " + std::to_string(columns) + " columns, got " +
                                   std::to_string(row.size()));
        rows.push_back(std::move(row));
    }
    return rows;
}

namespace {

std::string substitute(std::string tmpl, const std::string& key, const std::string& value) {
    const std::string tag = "{" + key + "}";
    for (std::size_t pos; (pos = tmpl.find(tag)) != std::string::npos;)
        tmpl.replace(pos, tag.size(), value);
    return tmpl;
}

// Unique scratch file names; processes within a batch may run
// concurrently so a bare counter per process is not enough.
std::string scratch_path(const std::string& dir, const char* stem, const char* ext) {
    static std::atomic<unsigned long> counter{0};
    const fs::path base = dir.empty() ? fs::temp_directory_path() : fs::path(dir);
    const auto n = counter.fetch_add(1);
    return (base / (std::string(stem) + "_" + std::to_string(getpid()) + "_" +
                    std::to_string(n) + ext))
        .string();
}

struct ScratchFile {
    std::string path;
    explicit ScratchFile(std::string p) : path(std::move(p)) {}
    ~ScratchFile() {
        std::error_code ec;
        fs::remove(path, ec);
    }
    ScratchFile(const ScratchFile&) = delete;
    ScratchFile& operator=(const ScratchFile&) = delete;
};

ProcessResult run_with_files(const std::string& netlist_text, const std::string& points_text,
                             const ExternalSimConfig& cfg) {
    if (cfg.command_template.find("{netlist}") == std::string::npos)
        throw Error("external simulator command lacks the {netlist} placeholder");
    ScratchFile netlist(scratch_path(cfg.scratch_dir, "hemtfit_net", ".cir"));
    ScratchFile points(scratch_path(cfg.scratch_dir, "hemtfit_pts", ".csv"));
    write_text_file(netlist.path, netlist_text);
    write_text_file(points.path, points_text);

    std::string cmd = substitute(cfg.command_template, "netlist", netlist.path);
    cmd = substitute(cmd, "points", points.path);

    ProcessResult pr = run_process(cmd, cfg.timeout_s);
    if (pr.timed_out)
        throw TimeoutError("external simulator exceeded " + fmt_double(cfg.timeout_s) + " s");
    if (pr.exit_code == 127) throw SpawnError("external simulator command not found");
    if (pr.exit_code != 0)
        throw ExitError("external simulator exited with status " + std::to_string(pr.exit_code));
    return pr;
}

} // namespace

IVDataset simulate_iv(const std::string& netlist_text, const IVDataset& points,
                      const ExternalSimConfig& cfg) {
    std::string pts = "vgs,vds\n";
    for (const auto& r : points.rows) pts += fmt_double(r.vgs) + "," + fmt_double(r.vds) + "\n";
    const ProcessResult pr = run_with_files(netlist_text, pts, cfg);

    const auto rows = parse_sim_table(pr.stdout_text, 3);
    if (rows.size() != points.rows.size())
        throw OutputParseError("simulator returned " + std::to_string(rows.size()) +
                               " rows for " + std::to_string(points.rows.size()) + " points");
    IVDataset out;
    out.rows.reserve(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i)
        out.rows.push_back({rows[i][0], rows[i][1], rows[i][2]});
    return out;
}

SParamDataset simulate_sparams(const std::string& netlist_text, const std::vector<double>& freqs_hz,
                               const ExternalSimConfig& cfg) {
    std::string pts = "freq_hz\n";
    for (double f : freqs_hz) pts += fmt_double(f) + "\n";
    const ProcessResult pr = run_with_files(netlist_text, pts, cfg);

    const auto rows = parse_sim_table(pr.stdout_text, 9);
    if (rows.size() != freqs_hz.size())
        throw OutputParseError("simulator returned " + std::to_string(rows.size()) +
                               " rows for " + std::to_string(freqs_hz.size()) + " frequencies");
    SParamDataset out;
    out.entries.reserve(rows.size());
    for (const auto& r : rows) {
        SParamEntry e;
        e.freq_hz = r[0];
        for (unsigned i = 0; i < 4; ++i) e.s[i] = Complex(r[1 + 2 * i], r[2 + 2 * i]);
        e.mask = kMaskAll;
        out.entries.push_back(e);
    }
    out.validate();
    return out;
}

} // namespace hemtfit::extsim
