#include "social/http_client.hpp"

#include "social/httplib.hpp"

#include <cctype>
#include <charconv>

#include "social/common.hpp"

namespace social::net {

Url parse_url(std::string_view url) {
    Url out;
    const auto scheme_end = url.find("://");
    if (scheme_end == std::string_view::npos) throw ValidationError("URL lacks a scheme: " + std::string(url));
    out.scheme = to_lower(url.substr(0, scheme_end));
    if (out.scheme != "http" && out.scheme != "https")
        throw ValidationError("unsupported URL scheme: " + out.scheme);
    auto rest = url.substr(scheme_end + 3);
    const auto slash = rest.find('/');
    auto authority = rest.substr(0, slash);
    out.target = slash == std::string_view::npos ? "/" : std::string(rest.substr(slash));
    if (authority.empty()) throw ValidationError("URL lacks a host: " + std::string(url));
    const auto colon = authority.rfind(':');
    if (colon != std::string_view::npos && authority.find(']') == std::string_view::npos) {
        out.host = std::string(authority.substr(0, colon));
        auto port_text = authority.substr(colon + 1);
        int port = 0;
        auto [p, ec] = std::from_chars(port_text.data(), port_text.data() + port_text.size(), port);
        if (ec != std::errc{} || p != port_text.data() + port_text.size() || port <= 0 || port > 65535)
            throw ValidationError("bad port in URL: " + std::string(url));
        out.port = port;
    } else {
        out.host = std::string(authority);
        out.port = out.scheme == "https" ? 443 : 80;
    }
    return out;
}

std::string url_encode(std::string_view s) {
    static constexpr char kHex[] = "0123456789ABCDEF";
    std::string out;
    out.reserve(s.size() * 3);
    for (unsigned char c : s) {
        if (std::isalnum(c) || c == '-' || c == '_' || c == '.' || c == '~') {
            out.push_back(static_cast<char>(c));
        } else {
            out.push_back('%');
            out.push_back(kHex[c >> 4]);
            out.push_back(kHex[c & 0xF]);
        }
    }
    return out;
}

std::string expand_template(std::string_view tmpl, const std::map<std::string, std::string>& values) {
    std::string out;
    std::size_t i = 0;
    while (i < tmpl.size()) {
        if (tmpl[i] == '{') {
            const auto close = tmpl.find('}', i);
            if (close != std::string_view::npos) {
                const std::string key(tmpl.substr(i + 1, close - i - 1));
                if (auto it = values.find(key); it != values.end()) {
                    out += url_encode(it->second);
                    i = close + 1;
                    continue;
                }
            }
        }
        out.push_back(tmpl[i++]);
    }
    return out;
}

namespace {

template <typename Fn>
HttpResponse with_client(const std::string& url_text, double timeout_s, Fn&& fn) {
    const Url url = parse_url(url_text);
    const std::string base = url.scheme + "://" + url.host + ":" + std::to_string(url.port);
    httplib::Client client(base);
    const auto sec = static_cast<time_t>(timeout_s);
    const auto usec = static_cast<time_t>((timeout_s - static_cast<double>(sec)) * 1e6);
    client.set_connection_timeout(sec, usec);
    client.set_read_timeout(sec, usec);
    client.set_write_timeout(sec, usec);
    auto result = fn(client, url.target);
    if (!result) {
        throw RetryableError("HTTP request to " + url.host + " failed: " +
                             httplib::to_string(result.error()));
    }
    return HttpResponse{result->status, result->body};
}

httplib::Headers to_httplib(const Headers& headers) {
    return httplib::Headers(headers.begin(), headers.end());
}

}  // namespace

HttpResponse http_get(const std::string& url, const Headers& headers, double timeout_s) {
    return with_client(url, timeout_s, [&](httplib::Client& c, const std::string& target) {
        return c.Get(target, to_httplib(headers));
    });
}

HttpResponse http_post_json(const std::string& url, const std::string& body, const Headers& headers,
                            double timeout_s) {
    return with_client(url, timeout_s, [&](httplib::Client& c, const std::string& target) {
        return c.Post(target, to_httplib(headers), body, "application/json");
    });
}

}  // namespace social::net
