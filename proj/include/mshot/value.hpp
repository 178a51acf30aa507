#pragma once

#include <compare>
#include <cstdint>
#include <functional>
#include <memory>
#include <ostream>
#include <span>
#include <string>
#include <vector>

namespace mshot {

/// A ground term: integer, quoted string, or function symbol (constants are
/// functions of arity zero). Copies share the payload.
class Value {
public:
    enum class Kind : std::uint8_t { Int, Str, Fun };

    /// The integer 0.
    Value();

    static Value integer(std::int64_t num);
    static Value string(std::string text);
    static Value function(std::string name, std::vector<Value> args = {});

    [[nodiscard]] Kind kind() const noexcept { return kind_; }
    [[nodiscard]] bool is_int() const noexcept { return kind_ == Kind::Int; }
    [[nodiscard]] std::int64_t as_int() const noexcept { return num_; }
    /// Function name or string contents.
    [[nodiscard]] const std::string& name() const noexcept;
    [[nodiscard]] std::span<const Value> args() const noexcept;
    [[nodiscard]] std::size_t arity() const noexcept { return args().size(); }
    [[nodiscard]] std::size_t hash() const noexcept { return hash_; }

    [[nodiscard]] std::string to_string() const;

    friend bool operator==(const Value& a, const Value& b) noexcept;
    /// Total order: integers < functions < strings. Functions compare by
    /// arity, name, then arguments.
    friend std::strong_ordering operator<=>(const Value& a, const Value& b) noexcept;

private:
    struct Payload {
        std::string        name;
        std::vector<Value> args;
    };

    Kind                           kind_{Kind::Int};
    std::int64_t                   num_{0};
    std::shared_ptr<const Payload> payload_;
    std::size_t                    hash_{0};
};

std::ostream& operator<<(std::ostream& out, const Value& v);

struct ValueHash {
    std::size_t operator()(const Value& v) const noexcept { return v.hash(); }
};

/// Predicate signature name/arity.
struct Signature {
    std::string name;
    std::size_t arity{0};

    friend auto operator<=>(const Signature&, const Signature&) = default;
    [[nodiscard]] std::string to_string() const { return name + "/" + std::to_string(arity); }
};

} // namespace mshot

template <>
struct std::hash<mshot::Value> {
    std::size_t operator()(const mshot::Value& v) const noexcept { return v.hash(); }
};
