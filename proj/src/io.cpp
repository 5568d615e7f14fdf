#include "ostta/io.hpp"

#include <cstdio>
#include <fstream>

namespace ostta {

std::string format_g9(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.9g", v);
    return buf;
}

const char* decision_name(Decision d) {
    return d == Decision::Desired ? "desired" : "undesired";
}

const char* reliability_name(Reliability r) {
    switch (r) {
        case Reliability::ReliableDesired: return "reliable_desired";
        case Reliability::UnreliableDesired: return "unreliable_desired";
        case Reliability::UnreliableUndesired: return "unreliable_undesired";
        case Reliability::ReliableUndesired: return "reliable_undesired";
    }
    return "?";
}

const char* loss_case_name(LossCase c) {
    switch (c) {
        case LossCase::DesiredCase: return "desired";
        case LossCase::UndesiredCase: return "undesired";
        case LossCase::NoUpdate: return "none";
    }
    return "?";
}

std::string steps_csv(std::span<const StepRecord> records) {
    std::string out =
        "t,s,tau_star,mu_d,mu_u,decision,reliability,prediction,gt_class,is_desired,"
        "l_re,l_d,l_u,total,k_plus,active_case,bank_d_size,bank_u_size,failed\n";
    auto opt = [](const std::optional<double>& v) {
        return v ? format_g9(*v) : std::string();
    };
    for (const StepRecord& r : records) {
        out += std::to_string(r.t);
        out += ',';
        out += format_g9(r.s);
        out += ',';
        out += format_g9(r.tau_star);
        out += ',';
        out += format_g9(r.mu_d);
        out += ',';
        out += format_g9(r.mu_u);
        out += ',';
        out += decision_name(r.decision);
        out += ',';
        out += reliability_name(r.reliability);
        out += ',';
        out += std::to_string(r.prediction);
        out += ',';
        out += std::to_string(r.gt_class);
        out += ',';
        out += r.is_desired ? '1' : '0';
        out += ',';
        out += opt(r.loss.l_re);
        out += ',';
        out += opt(r.loss.l_d);
        out += ',';
        out += opt(r.loss.l_u);
        out += ',';
        out += format_g9(r.loss.total);
        out += ',';
        out += std::to_string(r.loss.k_plus);
        out += ',';
        out += loss_case_name(r.loss.active_case);
        out += ',';
        out += std::to_string(r.bank_d_size);
        out += ',';
        out += std::to_string(r.bank_u_size);
        out += ',';
        out += r.failed ? '1' : '0';
        out += '\n';
    }
    return out;
}

namespace {

std::string json_escape(const std::string& s) {
    std::string out;
    out.reserve(s.size() + 2);
    for (char c : s) {
        switch (c) {
            case '"': out += "\\\""; break;
            case '\\': out += "\\\\"; break;
            case '\n': out += "\\n"; break;
            case '\t': out += "\\t"; break;
            default: out += c;
        }
    }
    return out;
}

std::string json_opt(const std::optional<double>& v) {
    return v ? format_g9(*v) : "null";
}

}  // namespace

std::string summary_json(const MetricSummary& summary, std::int64_t n_steps,
                         const std::string& method, std::uint64_t seed,
                         const std::vector<std::pair<std::string, std::string>>& config_echo) {
    std::string out = "{";
    out += "\"auroc\":" + json_opt(summary.auroc);
    out += ",\"fpr95\":" + json_opt(summary.fpr95);
    out += ",\"acc_d\":" + json_opt(summary.acc_d);
    out += ",\"acc_u\":" + json_opt(summary.acc_u);
    out += ",\"hm\":" + json_opt(summary.hm);
    out += ",\"n_steps\":" + std::to_string(n_steps);
    out += ",\"method\":\"" + json_escape(method) + "\"";
    out += ",\"seed\":" + std::to_string(seed);
    out += ",\"config_echo\":{";
    for (std::size_t i = 0; i < config_echo.size(); ++i) {
        if (i) out += ',';
        out += "\"" + json_escape(config_echo[i].first) + "\":\"" +
               json_escape(config_echo[i].second) + "\"";
    }
    out += "}}\n";
    return out;
}

std::string hist_csv(const ScoreHistograms& h) {
    std::string out = "window_start,bin_left,count_desired,count_undesired\n";
    for (const auto& w : h.windows) {
        for (int b = 0; b < ScoreHistograms::kBins; ++b) {
            const double bin_left = -1.0 + 2.0 * b / ScoreHistograms::kBins;
            out += std::to_string(w.start);
            out += ',';
            out += format_g9(bin_left);
            out += ',';
            out += std::to_string(w.desired[static_cast<std::size_t>(b)]);
            out += ',';
            out += std::to_string(w.undesired[static_cast<std::size_t>(b)]);
            out += '\n';
        }
    }
    return out;
}

std::string sweep_csv(const std::vector<std::pair<double, MetricSummary>>& rows,
                      const std::vector<std::int64_t>& n_steps) {
    std::string out = "value,auroc,fpr95,acc_d,acc_u,hm,n_steps\n";
    auto opt = [](const std::optional<double>& v) {
        return v ? format_g9(*v) : std::string();
    };
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const auto& [value, m] = rows[i];
        out += format_g9(value);
        out += ',';
        out += opt(m.auroc);
        out += ',';
        out += opt(m.fpr95);
        out += ',';
        out += opt(m.acc_d);
        out += ',';
        out += opt(m.acc_u);
        out += ',';
        out += opt(m.hm);
        out += ',';
        out += std::to_string(n_steps[i]);
        out += '\n';
    }
    return out;
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open for writing: " + path);
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw IoError("write failed: " + path);
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open for reading: " + path);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::map<std::string, std::string> parse_flat_config(const std::string& text) {
    std::map<std::string, std::string> out;
    std::size_t pos = 0;
    int line_no = 0;
    while (pos < text.size()) {
        std::size_t end = text.find('\n', pos);
        if (end == std::string::npos) end = text.size();
        std::string line = text.substr(pos, end - pos);
        pos = end + 1;
        ++line_no;
        // trim
        const auto l = line.find_first_not_of(" \t\r");
        if (l == std::string::npos) continue;
        const auto r = line.find_last_not_of(" \t\r");
        line = line.substr(l, r - l + 1);
        if (line.empty() || line[0] == '#') continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("config line " + std::to_string(line_no) + ": expected key=value");
        std::string key = line.substr(0, eq);
        std::string value = line.substr(eq + 1);
        const auto kr = key.find_last_not_of(" \t");
        key = key.substr(0, kr == std::string::npos ? 0 : kr + 1);
        const auto vl = value.find_first_not_of(" \t");
        value = vl == std::string::npos ? "" : value.substr(vl);
        if (key.empty())
            throw ConfigError("config line " + std::to_string(line_no) + ": empty key");
        out[key] = value;
    }
    return out;
}

}  // namespace ostta
