// Document-level context: administrative codes collected from confidently
// resolved country/state/county mentions, rendered as a "||"-joined string.
#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace topores {

class ContextString {
public:
    ContextString() = default;
    explicit ContextString(std::vector<std::string> codes) {
        for (auto& c : codes) add(std::move(c));
    }

    // Deduplicates, preserving first-seen order.
    void add(std::string code) {
        if (code.empty() || contains(code)) return;
        codes_.push_back(std::move(code));
    }

    bool contains(std::string_view code) const {
        for (const auto& c : codes_) {
            if (c == code) return true;
        }
        return false;
    }

    bool empty() const { return codes_.empty(); }
    const std::vector<std::string>& codes() const { return codes_; }

    std::string rendered() const {
        std::string out;
        for (size_t i = 0; i < codes_.size(); ++i) {
            if (i > 0) out += "||";
            out += codes_[i];
        }
        return out;
    }

private:
    std::vector<std::string> codes_;
};

} // namespace topores
