// Copyright 2026 The splitglm Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "splitglm/transport/link.h"

#include <arpa/inet.h>
#include <netdb.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <algorithm>
#include <atomic>
#include <cerrno>
#include <condition_variable>
#include <cstring>
#include <deque>
#include <mutex>
#include <thread>

#include "splitglm/error.h"

namespace splitglm::transport {
namespace {

constexpr std::array<std::uint8_t, 4> kPreambleMagic = {'S', 'G', 'L', 'M'};

struct Queue {
  std::mutex mu;
  std::condition_variable cv;
  std::deque<Bytes> frames;
};

struct LoopbackState {
  Queue to_first;
  Queue to_second;
  std::mutex closed_mu;
  bool closed = false;
};

class LoopbackLink final : public FrameLink {
 public:
  LoopbackLink(std::shared_ptr<LoopbackState> state, bool first)
      : state_(std::move(state)),
        inbox_(first ? state_->to_first : state_->to_second),
        outbox_(first ? state_->to_second : state_->to_first) {}
  ~LoopbackLink() override { Close(); }

  void Send(Bytes frame) override {
    if (IsClosed()) Fail(ErrorCode::kTransportFailure, "loopback closed");
    {
      std::lock_guard lock(outbox_.mu);
      outbox_.frames.push_back(std::move(frame));
    }
    outbox_.cv.notify_one();
  }

  Bytes Receive() override {
    std::unique_lock lock(inbox_.mu);
    inbox_.cv.wait(lock, [&] { return !inbox_.frames.empty() || IsClosed(); });
    if (inbox_.frames.empty()) {
      Fail(ErrorCode::kTransportFailure, "loopback closed by peer");
    }
    Bytes frame = std::move(inbox_.frames.front());
    inbox_.frames.pop_front();
    return frame;
  }

  void Close() override {
    {
      std::lock_guard lock(state_->closed_mu);
      state_->closed = true;
    }
    for (Queue* q : {&inbox_, &outbox_}) {
      std::lock_guard lock(q->mu);
      q->cv.notify_all();
    }
  }

 private:
  bool IsClosed() const {
    std::lock_guard lock(state_->closed_mu);
    return state_->closed;
  }
  std::shared_ptr<LoopbackState> state_;
  Queue& inbox_;
  Queue& outbox_;
};

class TappedLink final : public FrameLink {
 public:
  TappedLink(std::unique_ptr<FrameLink> inner, FrameObserver observer)
      : inner_(std::move(inner)), observer_(std::move(observer)) {}
  void Send(Bytes frame) override {
    observer_(true, frame);
    inner_->Send(std::move(frame));
  }
  Bytes Receive() override {
    Bytes frame = inner_->Receive();
    observer_(false, frame);
    return frame;
  }
  void Close() override { inner_->Close(); }

 private:
  std::unique_ptr<FrameLink> inner_;
  FrameObserver observer_;
};

[[noreturn]] void FailErrno(ErrorCode code, const std::string& what) {
  Fail(code, what + ": " + std::strerror(errno));
}

void WriteAll(int fd, std::span<const std::uint8_t> data) {
  std::size_t done = 0;
  while (done < data.size()) {
    const ssize_t n =
        ::send(fd, data.data() + done, data.size() - done, MSG_NOSIGNAL);
    if (n < 0) {
      if (errno == EINTR) continue;
      FailErrno(ErrorCode::kTransportFailure, "send");
    }
    done += static_cast<std::size_t>(n);
  }
}

void ReadAll(int fd, std::span<std::uint8_t> data) {
  std::size_t done = 0;
  while (done < data.size()) {
    const ssize_t n = ::recv(fd, data.data() + done, data.size() - done, 0);
    if (n == 0) Fail(ErrorCode::kTransportFailure, "connection closed by peer");
    if (n < 0) {
      if (errno == EINTR) continue;
      if (errno == EAGAIN || errno == EWOULDBLOCK) {
        Fail(ErrorCode::kTransportFailure, "receive timed out");
      }
      FailErrno(ErrorCode::kTransportFailure, "recv");
    }
    done += static_cast<std::size_t>(n);
  }
}

void SetSocketOptions(int fd) {
  int one = 1;
  ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof(one));
  timeval tv{};
  tv.tv_sec = kTcpIdleTimeout.count();
  ::setsockopt(fd, SOL_SOCKET, SO_RCVTIMEO, &tv, sizeof(tv));
}

class TcpLink final : public FrameLink {
 public:
  explicit TcpLink(int fd) : fd_(fd) { SetSocketOptions(fd_); }
  ~TcpLink() override {
    Close();
    ::close(fd_);
  }

  void Send(Bytes frame) override { WriteAll(fd_, frame); }

  Bytes Receive() override {
    Bytes frame(kFrameHeaderBytes);
    ReadAll(fd_, frame);
    std::uint32_t length = 0;
    for (int i = 0; i < 4; ++i) {
      length |= static_cast<std::uint32_t>(frame[kNonceBytes + i]) << (8 * i);
    }
    if (length > kMaxCiphertextBytes) {
      Fail(ErrorCode::kDecodeFailure, "frame length exceeds limit");
    }
    frame.resize(kFrameHeaderBytes + length);
    ReadAll(fd_, std::span(frame).subspan(kFrameHeaderBytes));
    return frame;
  }

  void Close() override {
    if (!closed_.exchange(true)) ::shutdown(fd_, SHUT_RDWR);
  }

 private:
  int fd_;
  std::atomic<bool> closed_ = false;
};

addrinfo* Resolve(const Endpoint& ep, bool passive) {
  addrinfo hints{};
  hints.ai_family = AF_UNSPEC;
  hints.ai_socktype = SOCK_STREAM;
  if (passive) hints.ai_flags = AI_PASSIVE;
  addrinfo* result = nullptr;
  const std::string port = std::to_string(ep.port);
  const int rc = ::getaddrinfo(ep.host.empty() ? nullptr : ep.host.c_str(),
                               port.c_str(), &hints, &result);
  if (rc != 0) {
    Fail(ErrorCode::kConnectFailure,
         "cannot resolve " + ep.host + ": " + ::gai_strerror(rc));
  }
  return result;
}

}  // namespace

std::pair<std::unique_ptr<FrameLink>, std::unique_ptr<FrameLink>>
MakeLoopbackPair() {
  auto state = std::make_shared<LoopbackState>();
  return {std::make_unique<LoopbackLink>(state, true),
          std::make_unique<LoopbackLink>(state, false)};
}

std::unique_ptr<FrameLink> Tap(std::unique_ptr<FrameLink> inner,
                               FrameObserver observer) {
  return std::make_unique<TappedLink>(std::move(inner), std::move(observer));
}

Endpoint ParseEndpoint(const std::string& text) {
  const auto colon = text.rfind(':');
  Endpoint ep;
  std::string port_text = text;
  if (colon != std::string::npos) {
    ep.host = text.substr(0, colon);
    port_text = text.substr(colon + 1);
  }
  if (ep.host.size() >= 2 && ep.host.front() == '[' && ep.host.back() == ']') {
    ep.host = ep.host.substr(1, ep.host.size() - 2);
  }
  try {
    std::size_t used = 0;
    const int port = std::stoi(port_text, &used);
    if (used != port_text.size() || port < 0 || port > 65535) throw 0;
    ep.port = static_cast<std::uint16_t>(port);
  } catch (...) {
    Fail(ErrorCode::kInvalidArgument, "bad endpoint '" + text + "'");
  }
  return ep;
}

TcpListener::TcpListener(const Endpoint& bind_to) {
  addrinfo* addrs = Resolve(bind_to, true);
  for (addrinfo* a = addrs; a != nullptr; a = a->ai_next) {
    const int fd = ::socket(a->ai_family, a->ai_socktype, a->ai_protocol);
    if (fd < 0) continue;
    int one = 1;
    ::setsockopt(fd, SOL_SOCKET, SO_REUSEADDR, &one, sizeof(one));
    if (::bind(fd, a->ai_addr, a->ai_addrlen) == 0 && ::listen(fd, 1) == 0) {
      fd_ = fd;
      break;
    }
    ::close(fd);
  }
  ::freeaddrinfo(addrs);
  if (fd_ < 0) FailErrno(ErrorCode::kConnectFailure, "cannot listen");
  sockaddr_storage addr{};
  socklen_t len = sizeof(addr);
  ::getsockname(fd_, reinterpret_cast<sockaddr*>(&addr), &len);
  port_ = ntohs(addr.ss_family == AF_INET6
                    ? reinterpret_cast<sockaddr_in6*>(&addr)->sin6_port
                    : reinterpret_cast<sockaddr_in*>(&addr)->sin_port);
}

TcpListener::~TcpListener() {
  if (fd_ >= 0) ::close(fd_);
}

std::pair<std::unique_ptr<FrameLink>, SessionId> TcpListener::Accept(
    std::chrono::milliseconds timeout) {
  pollfd pfd{fd_, POLLIN, 0};
  const int ready = ::poll(&pfd, 1, static_cast<int>(timeout.count()));
  if (ready == 0) Fail(ErrorCode::kConnectFailure, "no peer connected in time");
  if (ready < 0) FailErrno(ErrorCode::kConnectFailure, "poll");
  const int fd = ::accept(fd_, nullptr, nullptr);
  if (fd < 0) FailErrno(ErrorCode::kConnectFailure, "accept");
  auto link = std::make_unique<TcpLink>(fd);

  std::array<std::uint8_t, kPreambleMagic.size() + kSessionIdBytes> preamble{};
  ReadAll(fd, preamble);
  if (!std::equal(kPreambleMagic.begin(), kPreambleMagic.end(),
                  preamble.begin())) {
    Fail(ErrorCode::kDecodeFailure, "peer did not send a session preamble");
  }
  SessionId session_id{};
  std::copy(preamble.begin() + kPreambleMagic.size(), preamble.end(),
            session_id.begin());
  return {std::move(link), session_id};
}

std::unique_ptr<FrameLink> TcpConnect(const Endpoint& peer,
                                      const SessionId& session_id,
                                      std::chrono::milliseconds timeout) {
  const auto deadline = std::chrono::steady_clock::now() + timeout;
  std::string last_error = "timed out";
  while (true) {
    addrinfo* addrs = Resolve(peer, false);
    int connected = -1;
    for (addrinfo* a = addrs; a != nullptr && connected < 0; a = a->ai_next) {
      const int fd = ::socket(a->ai_family, a->ai_socktype, a->ai_protocol);
      if (fd < 0) continue;
      if (::connect(fd, a->ai_addr, a->ai_addrlen) == 0) {
        connected = fd;
      } else {
        last_error = std::strerror(errno);
        ::close(fd);
      }
    }
    ::freeaddrinfo(addrs);
    if (connected >= 0) {
      auto link = std::make_unique<TcpLink>(connected);
      Bytes preamble(kPreambleMagic.begin(), kPreambleMagic.end());
      preamble.insert(preamble.end(), session_id.begin(), session_id.end());
      WriteAll(connected, preamble);
      return link;
    }
    if (std::chrono::steady_clock::now() >= deadline) {
      Fail(ErrorCode::kConnectFailure, "cannot connect to " + peer.host + ":" +
                                           std::to_string(peer.port) + ": " +
                                           last_error);
    }
    std::this_thread::sleep_for(std::chrono::milliseconds(100));
  }
}

}  // namespace splitglm::transport
