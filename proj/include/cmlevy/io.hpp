#pragma once

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>
#include <openssl/evp.h>

#include "cmlevy/error.hpp"
#include "cmlevy/levy_model.hpp"
#include "cmlevy/series.hpp"
#include "cmlevy/test_function.hpp"

namespace cmlevy {

using json = nlohmann::json;

//! Config file does not match the schema.
class ConfigError : public Error {
  public:
    using Error::Error;
};

/*!
 * Read-only view of one JSON object that remembers which keys were read,
 * so that leftovers can be rejected as unknown.
 */
class ConfigBlock {
  public:
    ConfigBlock(const json& j, std::string path) : j_(j), path_(std::move(path)) {
        if (!j_.is_object())
            throw ConfigError(path_ + " must be an object");
    }

    const std::string& path() const noexcept { return path_; }
    bool has(const std::string& key) const { return j_.contains(key); }

    double number(const std::string& key, double fallback) { return number_impl(key, &fallback); }
    double number(const std::string& key) { return number_impl(key, nullptr); }

    long long integer(const std::string& key, long long fallback) {
        seen_.insert(key);
        if (!j_.contains(key))
            return fallback;
        const auto& v = j_.at(key);
        if (!v.is_number_integer())
            throw ConfigError(path_ + "." + key + " must be an integer");
        return v.get<long long>();
    }

    bool boolean(const std::string& key, bool fallback) {
        seen_.insert(key);
        if (!j_.contains(key))
            return fallback;
        const auto& v = j_.at(key);
        if (!v.is_boolean())
            throw ConfigError(path_ + "." + key + " must be true or false");
        return v.get<bool>();
    }

    std::string text(const std::string& key, const std::string& fallback,
                     const std::vector<std::string>& allowed = {}) {
        seen_.insert(key);
        std::string out = fallback;
        if (j_.contains(key)) {
            const auto& v = j_.at(key);
            if (!v.is_string())
                throw ConfigError(path_ + "." + key + " must be a string");
            out = v.get<std::string>();
        }
        if (!allowed.empty() && std::find(allowed.begin(), allowed.end(), out) == allowed.end()) {
            std::string list;
            for (const auto& a : allowed)
                list += (list.empty() ? "" : ", ") + a;
            throw ConfigError(path_ + "." + key + " must be one of: " + list);
        }
        return out;
    }

    std::vector<double> numbers(const std::string& key, std::vector<double> fallback) {
        seen_.insert(key);
        if (!j_.contains(key))
            return fallback;
        const auto& v = j_.at(key);
        if (!v.is_array())
            throw ConfigError(path_ + "." + key + " must be an array of numbers");
        std::vector<double> out;
        for (const auto& x : v) {
            if (!x.is_number())
                throw ConfigError(path_ + "." + key + " must be an array of numbers");
            out.push_back(x.get<double>());
        }
        return out;
    }

    ConfigBlock child(const std::string& key) {
        seen_.insert(key);
        if (!j_.contains(key))
            throw ConfigError("missing " + path_ + "." + key);
        return ConfigBlock(j_.at(key), path_ + "." + key);
    }

    const json& raw(const std::string& key) {
        seen_.insert(key);
        return j_.at(key);
    }

    //! Throws on keys that were never read.
    void finish() const {
        for (auto it = j_.begin(); it != j_.end(); ++it)
            if (!seen_.count(it.key()))
                throw ConfigError("unknown field " + path_ + "." + it.key());
    }

  private:
    double number_impl(const std::string& key, const double* fallback) {
        seen_.insert(key);
        if (!j_.contains(key)) {
            if (!fallback)
                throw ConfigError("missing " + path_ + "." + key);
            return *fallback;
        }
        const auto& v = j_.at(key);
        if (!v.is_number())
            throw ConfigError(path_ + "." + key + " must be a number");
        return v.get<double>();
    }

    const json& j_;
    std::string path_;
    std::set<std::string> seen_;
};

inline JumpLaw jump_law_from(ConfigBlock b) {
    JumpLaw j;
    const std::string kind = b.text("kind", "plus_minus", {"plus_minus", "normal", "exponential"});
    j.kind = kind == "normal" ? JumpLaw::Kind::normal
                              : kind == "exponential" ? JumpLaw::Kind::exponential : JumpLaw::Kind::plus_minus;
    j.a = b.number("a", 1.0);
    j.b = b.number("b", 0.0);
    b.finish();
    return j;
}

inline Stable stable_from(ConfigBlock& b) {
    Stable s;
    s.alpha = b.number("alpha");
    s.rho = b.number("rho", 0.5);
    s.scale = b.number("scale", 1.0);
    s.drift = b.number("drift", 0.0);
    return s;
}

inline CompoundPoissonDrift compound_from(ConfigBlock& b) {
    CompoundPoissonDrift c;
    c.rate = b.number("rate", 1.0);
    c.drift = b.number("drift", 0.0);
    if (b.has("jumps"))
        c.jumps = jump_law_from(b.child("jumps"));
    return c;
}

//! Model block: {"kind": ..., parameters of that kind}.
inline LevyModel model_from(ConfigBlock b) {
    const std::string kind = b.text(
        "kind", "", {"brownian", "stable", "cauchy", "gamma", "compound_poisson", "stable_plus_perturbation"});
    ModelKind m;
    if (kind == "brownian") {
        m = Brownian{b.number("sigma", 1.0), b.number("drift", 0.0)};
    } else if (kind == "stable") {
        m = stable_from(b);
    } else if (kind == "cauchy") {
        m = Cauchy{b.number("scale", 1.0), b.number("location", 0.0)};
    } else if (kind == "gamma") {
        m = GammaSub{b.number("shape", 1.0), b.number("rate", 1.0)};
    } else if (kind == "compound_poisson") {
        m = compound_from(b);
    } else {
        auto base = b.child("base");
        auto pert = b.child("perturbation");
        StablePlusPerturbation sp{stable_from(base), compound_from(pert)};
        base.finish();
        pert.finish();
        m = sp;
    }
    b.finish();
    try {
        return LevyModel(std::move(m));
    } catch (const ParameterError& e) {
        throw ConfigError(b.path() + ": " + e.what());
    }
}

//! Function block: {"kind": ..., parameters}.
inline TestFunction function_from(ConfigBlock b) {
    const std::string kind =
        b.text("kind", "", {"power", "inverse_log", "t_log", "g_inverse_log", "g_log", "cauchy_lil", "custom"});
    try {
        TestFunction f = [&] {
            if (kind == "power")
                return TestFunction::power(b.number("p"));
            if (kind == "inverse_log")
                return TestFunction::inverse_log(b.number("p", 1.0));
            if (kind == "t_log")
                return TestFunction::t_log(b.number("p", 1.0));
            if (kind == "g_inverse_log")
                return TestFunction::g_inverse_log(b.number("alpha"), b.number("scale", 1.0), b.number("p"));
            if (kind == "g_log")
                return TestFunction::g_log(b.number("alpha"), b.number("scale", 1.0), b.number("p"));
            if (kind == "cauchy_lil")
                return TestFunction::cauchy_lil();
            return TestFunction::custom(b.numbers("t", {}), b.numbers("y", {}));
        }();
        if (!b.boolean("normalize", true))
            f.set_normalized(false);
        b.finish();
        return f;
    } catch (const ParameterError& e) {
        throw ConfigError(b.path() + ": " + e.what());
    } catch (const ArgumentError& e) {
        throw ConfigError(b.path() + ": " + e.what());
    }
}

//! First 16 hex digits of the SHA-256 of the canonical (sorted-key) JSON dump.
inline std::string config_hash(const json& config) {
    const std::string text = config.dump();
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    EVP_Digest(text.data(), text.size(), digest, &len, EVP_sha256(), nullptr);
    static const char* hex = "0123456789abcdef";
    std::string out;
    for (unsigned int i = 0; i < 8 && i < len; ++i) {
        out += hex[digest[i] >> 4];
        out += hex[digest[i] & 15];
    }
    return out;
}

//! 17 significant digits, C locale.
inline std::string format_real(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

/*!
 * CSV writer: comma separated, LF line ends, header row, reals with 17
 * significant digits.
 */
class CsvTable {
  public:
    explicit CsvTable(std::vector<std::string> header) : header_(std::move(header)) {}

    class Row {
      public:
        explicit Row(std::vector<std::string>& cells) : cells_(cells) {}
        Row& operator<<(double x) {
            cells_.push_back(format_real(x));
            return *this;
        }
        Row& operator<<(int x) {
            cells_.push_back(std::to_string(x));
            return *this;
        }
        Row& operator<<(long long x) {
            cells_.push_back(std::to_string(x));
            return *this;
        }
        Row& operator<<(std::size_t x) {
            cells_.push_back(std::to_string(x));
            return *this;
        }
        Row& operator<<(const std::string& s) {
            cells_.push_back(s);
            return *this;
        }
        Row& operator<<(const char* s) {
            cells_.emplace_back(s);
            return *this;
        }

      private:
        std::vector<std::string>& cells_;
    };

    Row row() {
        rows_.emplace_back();
        return Row(rows_.back());
    }

    std::size_t size() const noexcept { return rows_.size(); }

    std::string str() const {
        std::string out;
        auto line = [&out](const std::vector<std::string>& cells) {
            for (std::size_t i = 0; i < cells.size(); ++i) {
                if (i)
                    out += ',';
                out += cells[i];
            }
            out += '\n';
        };
        line(header_);
        for (const auto& r : rows_) {
            CMLEVY_REQUIRE(r.size() == header_.size(), ArgumentError, "CSV row width differs from header");
            line(r);
        }
        return out;
    }

  private:
    std::vector<std::string> header_;
    std::vector<std::vector<std::string>> rows_;
};

inline json to_json(const SeriesReport& r) {
    return json{{"verdict", to_string(r.verdict)},
                {"rule", r.rule},
                {"tail_ratio", r.tail_ratio},
                {"decay_exponent", r.decay_exponent},
                {"terms", r.terms},
                {"partial_sums", r.partial_sums}};
}

inline void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out)
        throw Error("cannot write " + path);
    out << text;
    if (!out)
        throw Error("write failed for " + path);
}

inline std::string read_text(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw Error("cannot read " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

} // namespace cmlevy
