#pragma once

#include <map>
#include <string>
#include <string_view>

namespace social::net {

struct Url {
    std::string scheme;  // "http" or "https"
    std::string host;
    int port = 0;
    std::string target;  // path plus query, always starting with '/'
};

// Throws ValidationError on malformed URLs.
Url parse_url(std::string_view url);

std::string url_encode(std::string_view s);

// Replaces {name} placeholders with URL-encoded values.
std::string expand_template(std::string_view tmpl, const std::map<std::string, std::string>& values);

struct HttpResponse {
    int status = 0;
    std::string body;
};

using Headers = std::multimap<std::string, std::string>;

// Throws RetryableError when no response could be obtained (connection
// refused, timeout). HTTP error statuses are returned, not thrown.
HttpResponse http_get(const std::string& url, const Headers& headers, double timeout_s);
HttpResponse http_post_json(const std::string& url, const std::string& body, const Headers& headers,
                            double timeout_s);

inline bool is_transient_status(int status) { return status == 429 || status >= 500; }

}  // namespace social::net
