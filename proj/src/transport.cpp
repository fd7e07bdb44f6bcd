#include <verifide/session.hpp>

#include <arpa/inet.h>
#include <netinet/in.h>
#include <sys/socket.h>
#include <unistd.h>

#include <atomic>
#include <cstring>
#include <iostream>
#include <thread>

namespace verifide {

void serve_lines(const Config& config, const std::function<std::optional<std::string>()>& read_line,
                 const std::function<void(const std::string&)>& write_line) {
    std::mutex out_mu;
    Session session(config, [&](const std::string& line) {
        std::lock_guard lock(out_mu);
        write_line(line);
    });
    std::jthread pusher([&](std::stop_token stop) {
        while (!stop.stop_requested()) session.pump_wait(std::chrono::milliseconds(20));
    });
    while (std::optional<std::string> line = read_line()) session.handle_line(*line);
    pusher.request_stop();
}

void serve_stdio(const Config& config) {
    serve_lines(
        config,
        []() -> std::optional<std::string> {
            std::string line;
            if (!std::getline(std::cin, line)) return std::nullopt;
            return line;
        },
        [](const std::string& line) {
            std::cout << line << '\n';
            std::cout.flush();
        });
}

namespace {

class SocketLines {
public:
    explicit SocketLines(int fd) : fd_(fd) {}

    std::optional<std::string> read() {
        while (true) {
            const std::size_t nl = buffer_.find('\n');
            if (nl != std::string::npos) {
                std::string line = buffer_.substr(0, nl);
                buffer_.erase(0, nl + 1);
                return line;
            }
            char chunk[4096];
            const ssize_t n = ::recv(fd_, chunk, sizeof chunk, 0);
            if (n <= 0) {
                if (buffer_.empty()) return std::nullopt;
                std::string rest = std::move(buffer_);
                buffer_.clear();
                return rest;
            }
            buffer_.append(chunk, static_cast<std::size_t>(n));
        }
    }

    void write(const std::string& line) {
        std::string data = line + "\n";
        std::size_t sent = 0;
        while (sent < data.size()) {
            const ssize_t n = ::send(fd_, data.data() + sent, data.size() - sent, MSG_NOSIGNAL);
            if (n <= 0) return;
            sent += static_cast<std::size_t>(n);
        }
    }

private:
    int fd_;
    std::string buffer_;
};

}  // namespace

int serve_tcp(const Config& config, const std::string& host, int port) {
    const int listener = ::socket(AF_INET, SOCK_STREAM, 0);
    if (listener < 0) {
        std::cerr << "socket: " << std::strerror(errno) << '\n';
        return 1;
    }
    const int yes = 1;
    ::setsockopt(listener, SOL_SOCKET, SO_REUSEADDR, &yes, sizeof yes);
    sockaddr_in addr{};
    addr.sin_family = AF_INET;
    addr.sin_port = htons(static_cast<std::uint16_t>(port));
    if (::inet_pton(AF_INET, host.c_str(), &addr.sin_addr) != 1) {
        std::cerr << "invalid host address: " << host << '\n';
        ::close(listener);
        return 1;
    }
    if (::bind(listener, reinterpret_cast<sockaddr*>(&addr), sizeof addr) < 0 || ::listen(listener, 16) < 0) {
        std::cerr << "cannot listen on " << host << ':' << port << ": " << std::strerror(errno) << '\n';
        ::close(listener);
        return 1;
    }
    std::cerr << "listening on " << host << ':' << port << '\n';
    while (true) {
        const int fd = ::accept(listener, nullptr, nullptr);
        if (fd < 0) {
            if (errno == EINTR) continue;
            break;
        }
        std::thread([fd, config] {
            SocketLines lines(fd);
            serve_lines(config, [&] { return lines.read(); }, [&](const std::string& l) { lines.write(l); });
            ::close(fd);
        }).detach();
    }
    ::close(listener);
    return 0;
}

}  // namespace verifide
