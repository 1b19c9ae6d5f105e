#pragma once

// Single inclusion point for cpp-httplib so every translation unit agrees on
// the TLS configuration.

#ifdef SOCIAL_WITH_OPENSSL
#ifndef CPPHTTPLIB_OPENSSL_SUPPORT
#define CPPHTTPLIB_OPENSSL_SUPPORT
#endif
#endif
#include "httplib.h"
