#include "biomark/factsheet.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>

#include "biomark/common.hpp"
#include "biomark/rng.hpp"

namespace biomark {

std::string fact_value_repr(const FactValue& v) {
    if (std::holds_alternative<std::int64_t>(v)) return std::to_string(std::get<std::int64_t>(v));
    if (std::holds_alternative<double>(v)) {
        char buf[40];
        std::snprintf(buf, sizeof buf, "%.17g", std::get<double>(v));
        return buf;
    }
    return std::get<std::string>(v);
}

std::string fact_value_text(double v) {
    if (std::floor(v) == v && std::fabs(v) < 9.2e18) return std::to_string(std::int64_t(v));
    for (int precision : {15, 16, 17}) {
        char buf[40];
        std::snprintf(buf, sizeof buf, "%.*g", precision, v);
        if (std::strtod(buf, nullptr) == v) return buf;
    }
    return std::to_string(v);
}

std::string fact_value_text(const FactValue& v) {
    if (std::holds_alternative<std::int64_t>(v)) return std::to_string(std::get<std::int64_t>(v));
    if (std::holds_alternative<double>(v)) return fact_value_text(std::get<double>(v));
    return std::get<std::string>(v);
}

const FactValue& FactSheet::get(const std::string& key) const {
    auto it = entries_.find(key);
    if (it == entries_.end()) throw DataError("fact sheet: no entry for key " + key);
    return it->second;
}

double FactSheet::numeric(const std::string& key) const {
    const auto& v = get(key);
    if (std::holds_alternative<std::int64_t>(v)) return double(std::get<std::int64_t>(v));
    if (std::holds_alternative<double>(v)) return std::get<double>(v);
    throw DataError("fact sheet: entry is not numeric: " + key);
}

std::uint64_t FactSheet::content_hash() const {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    auto feed = [&h](const std::string& s) {
        for (unsigned char c : s) {
            h ^= c;
            h *= 0x100000001b3ULL;
        }
    };
    for (const auto& [key, value] : entries_) {  // std::map iterates in key order
        feed(key);
        feed("=");
        feed(fact_value_repr(value));
        feed("\n");
    }
    return h;
}

std::string audit_record_line(const AuditRecord& r) {
    char written[40], truth[40];
    std::snprintf(written, sizeof written, "%.17g", r.written);
    std::snprintf(truth, sizeof truth, "%.17g", r.truth);
    std::string line = "ts=" + std::to_string(r.ts) + "\trun=" + r.run_id + "\tkey=" + r.key +
                       "\twritten=" + written + "\ttruth=" + truth + "\taction=" +
                       (r.action == AuditRecord::Action::corrected ? "corrected"
                                                                   : "flagged_uncorrected") +
                       "\tlocation=" + r.location;
    return line;
}

void AuditLog::append(AuditRecord record) {
    std::lock_guard<std::mutex> lock(*mu_);
    record.ts = next_ts_++;
    records_.push_back(std::move(record));
}

void AuditLog::write(const std::string& path) const {
    std::lock_guard<std::mutex> lock(*mu_);
    std::ofstream out(path, std::ios::app);
    if (!out) throw DataError("cannot open audit log: " + path);
    for (const auto& r : records_) out << audit_record_line(r) << "\n";
}

std::vector<NumberBinding> default_bindings() {
    return {
        {"participants", "cohort.n_participants"},
        {"individuals", "cohort.n_participants"},
        {"features", "cohort.n_features"},
        {"candidates", "battery.n_candidates"},
        {"validated", "battery.n_validated"},
        {"checks", "battery.n_checks"},
        {"tests", "battery.n_checks"},
        {"methods", "screening.n_imputation_methods"},
        {"strategies", "screening.n_imputation_methods"},
    };
}

namespace {

struct Token {
    std::size_t begin = 0, end = 0;  // [begin, end) in the original text
    std::string text;
};

std::vector<Token> tokenize(const std::string& text) {
    std::vector<Token> out;
    std::size_t i = 0;
    while (i < text.size()) {
        while (i < text.size() && std::isspace(std::uint8_t(text[i]))) ++i;
        if (i >= text.size()) break;
        std::size_t j = i;
        while (j < text.size() && !std::isspace(std::uint8_t(text[j]))) ++j;
        out.push_back({i, j, text.substr(i, j - i)});
        i = j;
    }
    return out;
}

std::string lower_alpha(const std::string& s) {
    std::string out;
    for (char c : s)
        if (std::isalpha(std::uint8_t(c))) out.push_back(char(std::tolower(std::uint8_t(c))));
    return out;
}

// Parses a token as a number, tolerating surrounding punctuation and
// thousands separators.  Returns the [core_begin, core_end) span of the
// numeric part within the token.
bool parse_number_token(const std::string& tok, double* value, bool* had_commas,
                        std::size_t* core_begin, std::size_t* core_end) {
    std::size_t b = 0, e = tok.size();
    auto is_wrap = [](char c) {
        return c == '(' || c == ')' || c == '[' || c == ']' || c == '"' || c == '\'' ||
               c == ',' || c == '.' || c == ';' || c == ':' || c == '%';
    };
    while (b < e && is_wrap(tok[b]) && tok[b] != '.') ++b;
    while (e > b && is_wrap(tok[e - 1])) --e;
    if (b >= e) return false;
    std::string core = tok.substr(b, e - b);
    *had_commas = core.find(',') != std::string::npos;
    std::string plain;
    for (char c : core)
        if (c != ',') plain.push_back(c);
    if (plain.empty()) return false;
    char* endp = nullptr;
    const double v = std::strtod(plain.c_str(), &endp);
    if (endp != plain.c_str() + plain.size() || !std::isfinite(v)) return false;
    *value = v;
    *core_begin = b;
    *core_end = e;
    return true;
}

std::string with_thousands(std::int64_t v) {
    const std::string digits = std::to_string(std::llabs(v));
    std::string out;
    for (std::size_t i = 0; i < digits.size(); ++i) {
        if (i > 0 && (digits.size() - i) % 3 == 0) out.push_back(',');
        out.push_back(digits[i]);
    }
    return v < 0 ? "-" + out : out;
}

std::string format_truth(double truth, bool commas) {
    if (std::floor(truth) == truth && std::fabs(truth) < 9.2e18) {
        const auto iv = std::int64_t(truth);
        return commas ? with_thousands(iv) : std::to_string(iv);
    }
    for (int precision : {15, 16, 17}) {
        char buf[40];
        std::snprintf(buf, sizeof buf, "%.*g", precision, truth);
        if (std::strtod(buf, nullptr) == truth) return buf;
    }
    return std::to_string(truth);
}

}  // namespace

VerifyResult verify_numbers(const std::string& text, const FactSheet& fs,
                            const std::vector<NumberBinding>& bindings,
                            const std::string& location, AuditLog* log) {
    auto tokens = tokenize(text);
    VerifyResult out;

    auto binding_for = [&](const std::string& word) -> const NumberBinding* {
        const std::string w = lower_alpha(word);
        if (w.empty()) return nullptr;
        for (const auto& b : bindings)
            if (w == b.phrase) return &b;
        return nullptr;
    };

    for (std::size_t i = 0; i < tokens.size(); ++i) {
        double written = 0.0;
        bool commas = false;
        std::size_t cb = 0, ce = 0;
        if (!parse_number_token(tokens[i].text, &written, &commas, &cb, &ce)) continue;

        // Nearest bound phrase within three words, following side first.
        const NumberBinding* binding = nullptr;
        for (std::size_t d = 1; d <= 3 && !binding; ++d) {
            if (i + d < tokens.size()) binding = binding_for(tokens[i + d].text);
            if (!binding && d <= i) binding = binding_for(tokens[i - d].text);
        }
        if (!binding || !fs.has(binding->key)) continue;

        double truth;
        try {
            truth = fs.numeric(binding->key);
        } catch (const DataError&) {
            continue;
        }

        const double diff = std::fabs(written - truth);
        if (diff <= 1e-12 * std::max(1.0, std::fabs(truth))) continue;  // already right

        AuditRecord rec;
        rec.run_id = fs.run_id;
        rec.key = binding->key;
        rec.written = written;
        rec.truth = truth;
        rec.location = location + ":token" + std::to_string(i);

        const double lo = truth >= 0 ? truth / 3.0 : truth * 3.0;
        const double hi = truth >= 0 ? truth * 3.0 : truth / 3.0;
        if (written >= lo && written <= hi) {
            rec.action = AuditRecord::Action::corrected;
            tokens[i].text = tokens[i].text.substr(0, cb) + format_truth(truth, commas) +
                             tokens[i].text.substr(ce);
        } else {
            rec.action = AuditRecord::Action::flagged_uncorrected;
        }
        if (log) log->append(rec);
        out.records.push_back(std::move(rec));
    }

    // Reassemble with the original inter-token whitespace.
    std::string rebuilt;
    std::size_t cursor = 0;
    for (const auto& t : tokens) {
        rebuilt += text.substr(cursor, t.begin - cursor);
        rebuilt += t.text;
        cursor = t.end;
    }
    rebuilt += text.substr(cursor);
    out.text = std::move(rebuilt);
    return out;
}

ConsistencyResult consistency_check(const std::vector<ReportSection>& sections,
                                    const FactSheet& fs) {
    ConsistencyResult out;
    for (const auto& section : sections) {
        for (const auto& [key, value] : section.numbers) {
            std::string truth_repr;
            if (fs.has(key)) {
                truth_repr = fact_value_repr(fs.get(key));
            } else {
                truth_repr = "<absent>";
            }
            const std::string written_repr = fact_value_repr(value);
            if (written_repr != truth_repr)
                out.mismatches.push_back({section.name, key, written_repr, truth_repr});
        }
    }
    out.pass = out.mismatches.empty();
    return out;
}

}  // namespace biomark
