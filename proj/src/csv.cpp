#include "mmspc/csv.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <system_error>

namespace mmspc {

std::string format_double(double v) {
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 9);
    if (ec != std::errc{}) {
        throw std::runtime_error("number formatting failed");
    }
    return {buf, ptr};
}

namespace {

class CsvWriter {
public:
    explicit CsvWriter(const std::string& path) : path_(path), out_(path, std::ios::binary) {
        if (!out_) {
            throw std::runtime_error("cannot open " + path + " for writing");
        }
    }

    ~CsvWriter() = default;

    CsvWriter& cell(const std::string& s) {
        if (!first_) {
            line_ += ',';
        }
        line_ += s;
        first_ = false;
        return *this;
    }
    CsvWriter& cell(double v) { return cell(format_double(v)); }
    CsvWriter& cell(long long v) { return cell(std::to_string(v)); }

    void end_row() {
        line_ += '\n';
        out_ << line_;
        line_.clear();
        first_ = true;
    }

    void close() {
        out_.close();
        if (!out_) {
            throw std::runtime_error("write failed for " + path_);
        }
    }

private:
    std::string path_;
    std::ofstream out_;
    std::string line_;
    bool first_ = true;
};

}  // namespace

void write_trace_csv(const Trace& trace, const std::string& path) {
    CsvWriter w(path);
    w.cell("t").cell("level").cell("i_l").cell("state");
    for (int k = 1; k <= trace.n; ++k) {
        const auto s = std::to_string(k);
        w.cell("i_b" + s).cell("soc" + s).cell("group" + s);
    }
    w.end_row();
    for (const auto& r : trace.records) {
        const auto state = state_from_index(r.state, trace.n);
        const auto layout = decompose_groups(state);
        w.cell(r.t).cell(static_cast<long long>(r.level)).cell(r.i_l).cell(to_string(state));
        for (std::size_t i = 0; i < static_cast<std::size_t>(trace.n); ++i) {
            w.cell(r.i_b[i]).cell(r.soc[i]).cell(static_cast<long long>(layout.group_of(i) + 1));
        }
        w.end_row();
    }
    w.close();
}

void write_control_csv(const Trace& trace, const std::string& path) {
    CsvWriter w(path);
    w.cell("t");
    for (int k = 1; k <= trace.n; ++k) {
        w.cell("j_star" + std::to_string(k));
    }
    for (int k = 1; k <= trace.n; ++k) {
        w.cell("j_hat" + std::to_string(k));
    }
    w.end_row();
    for (std::size_t i = 0; i < trace.j_star.size(); ++i) {
        w.cell(trace.records[i].t);
        for (double v : trace.j_star[i]) w.cell(v);
        for (double v : trace.j_hat[i]) w.cell(v);
        w.end_row();
    }
    w.close();
}

void write_spectrum_csv(const Spectrum& spectrum, const std::string& path) {
    CsvWriter w(path);
    w.cell("freq_hz").cell("amplitude").end_row();
    for (const auto& b : spectrum.bins) {
        w.cell(b.freq_hz).cell(b.amplitude).end_row();
    }
    w.close();
}

void write_ageing_csv(const AgeingReport& report, const std::string& path) {
    CsvWriter w(path);
    w.cell("fc_hz").cell("ripple_ratio").end_row();
    for (const auto& e : report.entries) {
        w.cell(e.fc_hz).cell(e.ripple_ratio).end_row();
    }
    w.close();
}

void write_sweep_csv(const SweepReport& report, const std::string& path) {
    CsvWriter w(path);
    w.cell("m").cell("method").cell("fc_hz").cell("ripple_ratio").end_row();
    for (const auto& r : report.rows) {
        w.cell(r.m).cell(to_string(r.method)).cell(r.fc_hz).cell(r.ripple_ratio).end_row();
    }
    w.close();
}

void write_sweep_switching_csv(const SweepReport& report, const std::string& path) {
    CsvWriter w(path);
    w.cell("m").cell("method").cell("switch_rate_hz").cell("switch_rate_mean_hz")
        .cell("predicted_hz").cell("rms_avg_ratio").end_row();
    for (const auto& r : report.switching) {
        w.cell(r.m).cell(to_string(r.method)).cell(r.switch_rate).cell(r.switch_rate_mean)
            .cell(r.predicted).cell(r.rms_avg).end_row();
    }
    w.close();
}

void write_summary_csv(const ComparisonReport& report, const std::string& path) {
    const auto& p = report.proposed_summary;
    const auto& r = report.reference_summary;
    CsvWriter w(path);
    w.cell("metric").cell("proposed").cell("reference").end_row();
    auto row = [&w](const std::string& name, double a, double b) {
        w.cell(name).cell(a).cell(b).end_row();
    };
    row("module", static_cast<double>(p.module + 1), static_cast<double>(r.module + 1));
    row("rms_avg_ratio", p.rms_avg, r.rms_avg);
    row("ripple_ratio", p.ripple, r.ripple);
    for (std::size_t i = 0; i < p.ageing.entries.size(); ++i) {
        row("ageing_fc_" + format_double(p.ageing.entries[i].fc_hz), p.ageing.entries[i].ripple_ratio,
            r.ageing.entries[i].ripple_ratio);
    }
    row("pattern_peak", p.pattern.value, r.pattern.value);
    row("pattern_lag_s", p.pattern.lag_s, r.pattern.lag_s);
    row("autocorr_peak", p.raw_autocorr.value, r.raw_autocorr.value);
    row("switch_rate_hz", p.switch_rate, r.switch_rate);
    row("switch_rate_mean_hz", p.switch_rate_mean, r.switch_rate_mean);
    row("low_freq_content", p.low_freq_content, r.low_freq_content);
    row("peak_freq_hz", p.peak.freq_hz, r.peak.freq_hz);
    row("sidebands_5hz", p.sidebands, r.sidebands);
    w.close();
}

void write_randles_csv(const std::vector<double>& freqs, const std::vector<std::complex<double>>& z,
                       const std::string& path) {
    CsvWriter w(path);
    w.cell("freq_hz").cell("z_re").cell("z_im").cell("z_mag").end_row();
    for (std::size_t i = 0; i < freqs.size(); ++i) {
        w.cell(freqs[i]).cell(z[i].real()).cell(z[i].imag()).cell(std::abs(z[i])).end_row();
    }
    w.close();
}

std::vector<double> read_csv_column(const std::string& path, const std::string& column) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw std::runtime_error("cannot read " + path);
    }
    auto split = [](const std::string& line) {
        std::vector<std::string> cells;
        std::stringstream ss(line);
        std::string c;
        while (std::getline(ss, c, ',')) {
            if (!c.empty() && c.back() == '\r') c.pop_back();
            cells.push_back(c);
        }
        return cells;
    };
    std::string line;
    if (!std::getline(in, line)) {
        throw std::runtime_error(path + ": empty file");
    }
    const auto header = split(line);
    std::size_t col = header.size();
    for (std::size_t i = 0; i < header.size(); ++i) {
        if (header[i] == column) col = i;
    }
    if (col == header.size()) {
        throw std::runtime_error(path + ": no column \"" + column + "\"");
    }
    std::vector<double> out;
    std::size_t row = 1;
    while (std::getline(in, line)) {
        ++row;
        if (line.empty()) continue;
        const auto cells = split(line);
        if (col >= cells.size()) {
            throw std::runtime_error(path + ":" + std::to_string(row) + ": short row");
        }
        double v = 0.0;
        const auto& s = cells[col];
        const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
        if (ec != std::errc{} || ptr != s.data() + s.size()) {
            throw std::runtime_error(path + ":" + std::to_string(row) + ": not a number: " + s);
        }
        out.push_back(v);
    }
    return out;
}

}  // namespace mmspc
