use std::time::Duration;

use super::IngestError;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Method {
    Get,
    Post,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HttpRequest {
    pub method: Method,
    pub url: String,
    pub headers: Vec<(String, String)>,
    /// Basic-auth pair, sent only with token requests.
    pub basic_auth: Option<(String, String)>,
    /// Form-encoded body fields.
    pub form: Vec<(String, String)>,
}

impl HttpRequest {
    pub fn get(url: impl Into<String>) -> Self {
        Self {
            method: Method::Get,
            url: url.into(),
            headers: Vec::new(),
            basic_auth: None,
            form: Vec::new(),
        }
    }

    pub fn header(mut self, name: &str, value: impl Into<String>) -> Self {
        self.headers.push((name.to_string(), value.into()));
        self
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HttpResponse {
    pub status: u16,
    pub headers: Vec<(String, String)>,
    pub body: String,
}

impl HttpResponse {
    pub fn header(&self, name: &str) -> Option<&str> {
        self.headers
            .iter()
            .find(|(k, _)| k.eq_ignore_ascii_case(name))
            .map(|(_, v)| v.as_str())
    }

    /// Wait requested by a 429 response. Reddit sends `retry-after` on some
    /// edges and `x-ratelimit-reset` on the OAuth API.
    pub fn retry_after(&self) -> Duration {
        ["retry-after", "x-ratelimit-reset"]
            .iter()
            .filter_map(|h| self.header(h))
            .filter_map(|v| v.trim().parse::<f64>().ok())
            .find(|s| s.is_finite() && *s >= 0.0)
            .map(Duration::from_secs_f64)
            .unwrap_or(Duration::from_secs(60))
    }
}

/// Anything able to perform one HTTP exchange.
pub trait Transport: Send + Sync {
    fn send(&self, req: &HttpRequest) -> Result<HttpResponse, IngestError>;
}

impl<T: Transport + ?Sized> Transport for &T {
    fn send(&self, req: &HttpRequest) -> Result<HttpResponse, IngestError> {
        (**self).send(req)
    }
}

impl<T: Transport + ?Sized> Transport for Box<T> {
    fn send(&self, req: &HttpRequest) -> Result<HttpResponse, IngestError> {
        (**self).send(req)
    }
}

/// Transport that refuses every request; pairs with fixture mode.
#[derive(Clone, Copy, Debug, Default)]
pub struct OfflineTransport;

impl Transport for OfflineTransport {
    fn send(&self, req: &HttpRequest) -> Result<HttpResponse, IngestError> {
        Err(IngestError::Network(format!("offline: refused {}", req.url)))
    }
}

#[cfg(feature = "live")]
pub use live::ReqwestTransport;

#[cfg(feature = "live")]
mod live {
    use super::*;

    pub struct ReqwestTransport {
        client: reqwest::blocking::Client,
    }

    impl ReqwestTransport {
        pub fn new(user_agent: &str) -> Result<Self, IngestError> {
            let client = reqwest::blocking::Client::builder()
                .user_agent(user_agent)
                .timeout(Duration::from_secs(30))
                .build()
                .map_err(|e| IngestError::Network(e.to_string()))?;
            Ok(Self { client })
        }
    }

    impl Transport for ReqwestTransport {
        fn send(&self, req: &HttpRequest) -> Result<HttpResponse, IngestError> {
            let mut builder = match req.method {
                Method::Get => self.client.get(&req.url),
                Method::Post => self.client.post(&req.url),
            };
            for (k, v) in &req.headers {
                builder = builder.header(k, v);
            }
            if let Some((user, pass)) = &req.basic_auth {
                builder = builder.basic_auth(user, Some(pass));
            }
            if !req.form.is_empty() {
                let body: Vec<String> = req
                    .form
                    .iter()
                    .map(|(k, v)| format!("{}={}", form_escape(k), form_escape(v)))
                    .collect();
                builder = builder
                    .header("content-type", "application/x-www-form-urlencoded")
                    .body(body.join("&"));
            }
            let resp = builder
                .send()
                .map_err(|e| IngestError::Network(e.to_string()))?;
            let status = resp.status().as_u16();
            let headers = resp
                .headers()
                .iter()
                .filter_map(|(k, v)| Some((k.as_str().to_string(), v.to_str().ok()?.to_string())))
                .collect();
            let body = resp
                .text()
                .map_err(|e| IngestError::Network(e.to_string()))?;
            Ok(HttpResponse { status, headers, body })
        }
    }

    fn form_escape(s: &str) -> String {
        let mut out = String::with_capacity(s.len());
        for b in s.bytes() {
            match b {
                b'A'..=b'Z' | b'a'..=b'z' | b'0'..=b'9' | b'-' | b'_' | b'.' | b'~' => out.push(b as char),
                b' ' => out.push('+'),
                _ => out.push_str(&format!("%{b:02X}")),
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn retry_after_parsing() {
        let mut r = HttpResponse {
            status: 429,
            headers: vec![("Retry-After".into(), "7".into())],
            body: String::new(),
        };
        assert_eq!(r.retry_after(), Duration::from_secs(7));
        r.headers = vec![("x-ratelimit-reset".into(), "1.5".into())];
        assert_eq!(r.retry_after(), Duration::from_millis(1500));
        r.headers.clear();
        assert_eq!(r.retry_after(), Duration::from_secs(60));
    }
}
