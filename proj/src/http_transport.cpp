#define CPPHTTPLIB_OPENSSL_SUPPORT
#include <httplib.h>

#include "ctikit/enrich.hpp"
#include "ctikit/error.hpp"

namespace ctikit::enrich {

namespace {

class HttpTransport final : public Transport {
public:
    explicit HttpTransport(std::chrono::seconds timeout) : timeout_(timeout) {}

    HttpResponse send(const HttpRequest& request) override {
        auto scheme_end = request.url.find("://");
        if (scheme_end == std::string::npos) throw Error(ErrorCode::Config, "bad URL '" + request.url + "'");
        auto path_begin = request.url.find('/', scheme_end + 3);
        std::string origin = request.url.substr(0, path_begin);
        std::string path = path_begin == std::string::npos ? "/" : request.url.substr(path_begin);

        httplib::Client client(origin);
        client.set_connection_timeout(timeout_);
        client.set_read_timeout(timeout_);
        client.set_follow_location(true);
        httplib::Headers headers(request.headers.begin(), request.headers.end());

        auto res = request.method == "POST"
                       ? client.Post(path, headers, request.body, request.content_type)
                       : client.Get(path, headers);
        if (!res)
            throw Error(ErrorCode::Network, origin + ": " + httplib::to_string(res.error()));
        return HttpResponse{res->status, res->body};
    }

private:
    std::chrono::seconds timeout_;
};

}  // namespace

std::unique_ptr<Transport> make_http_transport(std::chrono::seconds timeout) {
    return std::make_unique<HttpTransport>(timeout);
}

}  // namespace ctikit::enrich
