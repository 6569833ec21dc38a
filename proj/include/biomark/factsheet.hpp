#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <variant>
#include <vector>

namespace biomark {

using FactValue = std::variant<std::int64_t, double, std::string>;

// Canonical representation used for hashing and bit-exact comparison.
std::string fact_value_repr(const FactValue& v);

// Human-facing text: integers plain, doubles in the shortest form that
// parses back exactly.
std::string fact_value_text(const FactValue& v);
std::string fact_value_text(double v);

// Flat key-value record of every reportable number; the sole source of truth
// for report text.  Keys are dotted lowercase paths.
class FactSheet {
  public:
    void set(const std::string& key, FactValue value) { entries_[key] = std::move(value); }
    void set_int(const std::string& key, std::int64_t v) { set(key, v); }
    void set_real(const std::string& key, double v) { set(key, v); }
    void set_text(const std::string& key, std::string v) { set(key, std::move(v)); }

    bool has(const std::string& key) const { return entries_.count(key) > 0; }
    const FactValue& get(const std::string& key) const;
    double numeric(const std::string& key) const;  // int64 widens to double

    const std::map<std::string, FactValue>& entries() const { return entries_; }

    // FNV-1a over "key=repr\n" in key order; insertion-order invariant.
    std::uint64_t content_hash() const;

    std::string run_id;

  private:
    std::map<std::string, FactValue> entries_;
};

struct AuditRecord {
    std::uint64_t ts = 0;  // logical event index; keeps runs byte-reproducible
    std::string run_id;
    std::string key;
    double written = 0.0;
    double truth = 0.0;
    enum class Action { corrected, flagged_uncorrected } action = Action::corrected;
    std::string location;
};

std::string audit_record_line(const AuditRecord& r);

// Append-only, serialized writes; one machine-readable line per record.
class AuditLog {
  public:
    AuditLog() : mu_(new std::mutex) {}
    void append(AuditRecord record);
    const std::vector<AuditRecord>& records() const { return records_; }
    void write(const std::string& path) const;

  private:
    std::unique_ptr<std::mutex> mu_;
    std::vector<AuditRecord> records_;
    std::uint64_t next_ts_ = 0;
};

// Phrase-to-key bindings for the numeric verification scanner.
struct NumberBinding {
    std::string phrase;  // matched case-insensitively against nearby words
    std::string key;     // fact sheet key holding the truth
};

std::vector<NumberBinding> default_bindings();

struct VerifyResult {
    std::string text;
    std::vector<AuditRecord> records;
};

// Pattern-based correction: a number adjacent to a bound phrase is replaced
// by the fact-sheet truth when it falls within [truth/3, 3*truth] and logged
// as corrected; values outside stay put and are logged flagged_uncorrected.
// Idempotent.
VerifyResult verify_numbers(const std::string& text, const FactSheet& fs,
                            const std::vector<NumberBinding>& bindings,
                            const std::string& location, AuditLog* log = nullptr);

struct ReportSection {
    std::string name;
    std::string text;
    std::map<std::string, FactValue> numbers;  // tagged numerics cited by the section
};

struct ConsistencyMismatch {
    std::string section;
    std::string key;
    std::string written;
    std::string truth;
};

struct ConsistencyResult {
    bool pass = true;
    std::vector<ConsistencyMismatch> mismatches;
};

// Every tagged numeric in every section must equal its fact-sheet entry
// bit-exactly (missing keys mismatch too).
ConsistencyResult consistency_check(const std::vector<ReportSection>& sections,
                                    const FactSheet& fs);

}  // namespace biomark
