// External reranker bridge: one JSON request line per mention on the child
// process's stdin, one JSON response line with raw scores on its stdout.
// The toolkit softmaxes the returned scores. Any failure (spawn error,
// timeout, crash, malformed response) marks the bridge dead and the caller
// falls back to the built-in model.
//
//   request:  {"mention": str, "context_codes": [str...],
//              "candidates": [{"id": int, "input_string": str,
//                              "log_pop": float, "type_code": str}...]}
//   response: {"scores": [float...]}   // one score per candidate
#pragma once

#include <cerrno>
#include <csignal>
#include <cstdint>
#include <cstring>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <poll.h>
#include <sys/types.h>
#include <sys/wait.h>
#include <unistd.h>

#include <json.hpp>

#include "topores/pipeline.hpp"
#include "topores/reranker.hpp"

namespace topores {

class ExternalReranker {
public:
    explicit ExternalReranker(std::string command, double timeout_seconds = 10.0)
        : command_(std::move(command)), timeout_ms_(static_cast<int>(timeout_seconds * 1000.0)) {
        ::signal(SIGPIPE, SIG_IGN);
        spawn();
    }

    ExternalReranker(const ExternalReranker&) = delete;
    ExternalReranker& operator=(const ExternalReranker&) = delete;

    ~ExternalReranker() { shutdown(); }

    bool alive() const { return pid_ > 0 && !failed_; }

    // Raw scores for the instance's candidates, or nullopt on any failure.
    std::optional<std::vector<double>> rescore(const RerankInstance& inst) {
        if (!alive()) return std::nullopt;
        nlohmann::json req;
        req["mention"] = inst.mention;
        req["context_codes"] = inst.context.codes();
        nlohmann::json cands = nlohmann::json::array();
        for (const Candidate& c : inst.candidates) {
            nlohmann::json jc;
            jc["id"] = c.entry->id;
            jc["input_string"] = to_input_string(inst.mention, *c.entry, inst.context);
            jc["log_pop"] = std::log(static_cast<double>(c.entry->population) + 1.0);
            jc["type_code"] = c.entry->feature_code;
            cands.push_back(std::move(jc));
        }
        req["candidates"] = std::move(cands);

        std::string line = req.dump();
        line.push_back('\n');
        if (!write_all(line)) { fail("write to external reranker failed"); return std::nullopt; }

        std::string response;
        if (!read_line(response)) { fail("no response from external reranker"); return std::nullopt; }
        nlohmann::json j = nlohmann::json::parse(response, nullptr, false);
        if (j.is_discarded() || !j.contains("scores") || !j["scores"].is_array() ||
            j["scores"].size() != inst.candidates.size()) {
            fail("malformed response from external reranker");
            return std::nullopt;
        }
        std::vector<double> scores;
        scores.reserve(inst.candidates.size());
        for (const auto& v : j["scores"]) {
            if (!v.is_number()) { fail("non-numeric score from external reranker"); return std::nullopt; }
            scores.push_back(v.get<double>());
        }
        return scores;
    }

private:
    void spawn() {
        int to_child[2], from_child[2];
        if (::pipe(to_child) != 0 || ::pipe(from_child) != 0) {
            failed_ = true;
            return;
        }
        pid_ = ::fork();
        if (pid_ < 0) {
            failed_ = true;
            return;
        }
        if (pid_ == 0) {
            ::dup2(to_child[0], STDIN_FILENO);
            ::dup2(from_child[1], STDOUT_FILENO);
            ::close(to_child[0]);
            ::close(to_child[1]);
            ::close(from_child[0]);
            ::close(from_child[1]);
            ::execl("/bin/sh", "sh", "-c", command_.c_str(), static_cast<char*>(nullptr));
            ::_exit(127);
        }
        ::close(to_child[0]);
        ::close(from_child[1]);
        in_fd_ = to_child[1];
        out_fd_ = from_child[0];
    }

    bool write_all(const std::string& data) {
        size_t off = 0;
        while (off < data.size()) {
            ssize_t n = ::write(in_fd_, data.data() + off, data.size() - off);
            if (n <= 0) {
                if (n < 0 && errno == EINTR) continue;
                return false;
            }
            off += static_cast<size_t>(n);
        }
        return true;
    }

    bool read_line(std::string& out) {
        out.clear();
        while (true) {
            size_t nl = buffer_.find('\n');
            if (nl != std::string::npos) {
                out = buffer_.substr(0, nl);
                buffer_.erase(0, nl + 1);
                return true;
            }
            struct pollfd pfd{out_fd_, POLLIN, 0};
            int pr = ::poll(&pfd, 1, timeout_ms_);
            if (pr <= 0) return false;  // timeout or poll error
            char chunk[4096];
            ssize_t n = ::read(out_fd_, chunk, sizeof(chunk));
            if (n <= 0) {
                if (n < 0 && errno == EINTR) continue;
                return false;  // EOF: child exited
            }
            buffer_.append(chunk, static_cast<size_t>(n));
        }
    }

    void fail(const char* why) {
        if (!failed_) std::cerr << "warning: " << why << "; falling back to built-in reranker\n";
        failed_ = true;
    }

    void shutdown() {
        if (in_fd_ >= 0) ::close(in_fd_);
        if (out_fd_ >= 0) ::close(out_fd_);
        in_fd_ = out_fd_ = -1;
        if (pid_ > 0) {
            int status = 0;
            ::waitpid(pid_, &status, 0);
            pid_ = -1;
        }
    }

    std::string command_;
    int timeout_ms_ = 10000;
    pid_t pid_ = -1;
    int in_fd_ = -1;
    int out_fd_ = -1;
    bool failed_ = false;
    std::string buffer_;
};

// Scorer that consults the external process and falls back to the given
// scorer once the bridge fails.
inline ScoreFn bridge_scorer(ExternalReranker& bridge, ScoreFn fallback) {
    return [&bridge, fallback](const RerankInstance& inst) -> std::vector<double> {
        if (auto scores = bridge.rescore(inst)) {
            detail::softmax_inplace(*scores);
            return *scores;
        }
        return fallback(inst);
    };
}

} // namespace topores
