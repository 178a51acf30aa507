#include <mshot/value.hpp>

#include <sstream>

namespace mshot {
namespace {

std::size_t mix(std::size_t seed, std::size_t h) {
    return seed ^ (h + 0x9e3779b97f4a7c15ULL + (seed << 6) + (seed >> 2));
}

const std::string& empty_string() {
    static const std::string empty;
    return empty;
}

void print(std::ostream& out, const Value& v) {
    switch (v.kind()) {
        case Value::Kind::Int: out << v.as_int(); break;
        case Value::Kind::Str:
            out << '"';
            for (char c : v.name()) {
                switch (c) {
                    case '"': out << "\\\""; break;
                    case '\\': out << "\\\\"; break;
                    case '\n': out << "\\n"; break;
                    default: out << c;
                }
            }
            out << '"';
            break;
        case Value::Kind::Fun: {
            out << v.name();
            auto args = v.args();
            if (!args.empty()) {
                out << '(';
                for (std::size_t i = 0; i < args.size(); ++i) {
                    if (i > 0) { out << ','; }
                    print(out, args[i]);
                }
                out << ')';
            }
            break;
        }
    }
}

} // namespace

Value::Value() : hash_(mix(1, std::hash<std::int64_t>{}(0))) {}

Value Value::integer(std::int64_t num) {
    Value v;
    v.kind_ = Kind::Int;
    v.num_  = num;
    v.hash_ = mix(1, std::hash<std::int64_t>{}(num));
    return v;
}

Value Value::string(std::string text) {
    Value v;
    v.kind_    = Kind::Str;
    v.hash_    = mix(2, std::hash<std::string>{}(text));
    v.payload_ = std::make_shared<const Payload>(Payload{std::move(text), {}});
    return v;
}

Value Value::function(std::string name, std::vector<Value> args) {
    Value v;
    v.kind_ = Kind::Fun;
    std::size_t h = mix(3, std::hash<std::string>{}(name));
    for (const auto& a : args) { h = mix(h, a.hash()); }
    v.hash_    = h;
    v.payload_ = std::make_shared<const Payload>(Payload{std::move(name), std::move(args)});
    return v;
}

const std::string& Value::name() const noexcept {
    return payload_ ? payload_->name : empty_string();
}

std::span<const Value> Value::args() const noexcept {
    if (!payload_) { return {}; }
    return payload_->args;
}

std::string Value::to_string() const {
    std::ostringstream out;
    print(out, *this);
    return out.str();
}

bool operator==(const Value& a, const Value& b) noexcept {
    if (a.kind_ != b.kind_ || a.hash_ != b.hash_) { return false; }
    if (a.kind_ == Value::Kind::Int) { return a.num_ == b.num_; }
    if (a.payload_ == b.payload_) { return true; }
    return a.payload_->name == b.payload_->name && a.payload_->args == b.payload_->args;
}

std::strong_ordering operator<=>(const Value& a, const Value& b) noexcept {
    auto rank = [](Value::Kind k) {
        switch (k) {
            case Value::Kind::Int: return 0;
            case Value::Kind::Fun: return 1;
            case Value::Kind::Str: return 2;
        }
        return 3;
    };
    if (a.kind_ != b.kind_) { return rank(a.kind_) <=> rank(b.kind_); }
    switch (a.kind_) {
        case Value::Kind::Int: return a.num_ <=> b.num_;
        case Value::Kind::Str: return a.name() <=> b.name();
        case Value::Kind::Fun: {
            if (auto c = a.arity() <=> b.arity(); c != 0) { return c; }
            if (auto c = a.name() <=> b.name(); c != 0) { return c; }
            auto x = a.args();
            auto y = b.args();
            for (std::size_t i = 0; i < x.size(); ++i) {
                if (auto c = x[i] <=> y[i]; c != 0) { return c; }
            }
            return std::strong_ordering::equal;
        }
    }
    return std::strong_ordering::equal;
}

std::ostream& operator<<(std::ostream& out, const Value& v) {
    print(out, v);
    return out;
}

} // namespace mshot
