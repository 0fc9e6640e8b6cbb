use std::io::{BufRead, BufReader};
use std::path::Path;
use std::process::{Child, Command, Output, Stdio};

const BIN: &str = env!("CARGO_BIN_EXE_ssitls");

fn run(args: &[&str]) -> Output {
    Command::new(BIN).args(args).output().expect("spawn ssitls")
}

fn ok(args: &[&str]) -> String {
    let out = run(args);
    assert!(
        out.status.success(),
        "ssitls {args:?} failed: {}\n{}",
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

/// Spawns a long-running subcommand and returns it with the address it
/// reported on its first stdout line.
fn spawn(args: &[&str]) -> (Child, String, BufReader<std::process::ChildStdout>) {
    let mut child = Command::new(BIN).args(args).stdout(Stdio::piped()).spawn().unwrap();
    let mut out = BufReader::new(child.stdout.take().unwrap());
    let mut line = String::new();
    out.read_line(&mut line).unwrap();
    let addr = line.trim().rsplit(' ').next().unwrap().to_string();
    (child, addr, out)
}

fn p(dir: &Path, name: &str) -> String {
    dir.join(name).to_str().unwrap().to_string()
}

struct Kill(Child);

impl Drop for Kill {
    fn drop(&mut self) {
        let _ = self.0.kill();
        let _ = self.0.wait();
    }
}

#[test]
fn help_and_usage_errors() {
    let out = run(&["--help"]);
    assert!(out.status.success());
    assert_eq!(run(&["client", "--expect-flow"]).status.code(), Some(2));
}

#[test]
fn end_to_end_over_a_ledger_node() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();

    ok(&["pki", "issue", "--suite", "ecdsa", "--subject", "ledger.test", "--out-dir", &p(d, "ledger-pki")]);
    ok(&["pki", "issue", "--suite", "eddsa", "--subject", "server.test", "--out-dir", &p(d, "server-pki")]);
    ok(&["pki", "issue", "--suite", "eddsa", "--subject", "client.test", "--out-dir", &p(d, "client-pki")]);
    let (node, ledger_addr, _) = spawn(&[
        "ledger", "serve", "--method", "iota", "--store", &p(d, "iota.log"), "--bind", "127.0.0.1:0",
        "--cert-chain", &p(d, "ledger-pki/chain.pem"), "--key", &p(d, "ledger-pki/leaf.key"),
    ]);
    let _node = Kill(node);
    let ledger = format!("iota=tcp://{ledger_addr}");
    let root = p(d, "ledger-pki/root.pem");
    let lg = ["--ledger", &ledger, "--ledger-root", &root];

    let did = |name: &str| {
        let key = p(d, &format!("{name}.key"));
        let mut args = vec!["identity", "did-create", "--suite", "eddsa", "--key-out", &key];
        args.extend(lg);
        ok(&args).trim().to_string()
    };
    let issuer = did("issuer");
    let server = did("server");
    let client = did("client");
    assert!(server.starts_with("did:iota:"));

    let mut resolve = vec!["identity", "did-resolve", &server];
    resolve.extend(lg);
    assert!(ok(&resolve).contains(&server));

    std::fs::create_dir(d.join("issuers")).unwrap();
    for (who, subject) in [("server", &server), ("client", &client)] {
        ok(&[
            "identity", "vc-issue", "--issuer", &issuer, "--issuer-key", &p(d, "issuer.key"), "--subject", subject,
            "--claim", &format!("role={who}"), "--out", &p(d, &format!("{who}-vc.json")),
            "--issuer-pem-out", &p(d, "issuers/issuer.pem"),
        ]);
    }
    let verified = ok(&["identity", "vc-verify", &p(d, "server-vc.json"), "--trusted-issuers", &p(d, "issuers")]);
    assert!(verified.starts_with("valid"), "{verified}");

    std::fs::write(d.join("dids.txt"), format!("# DID-mode allow-list\n{server}\n{client}\n")).unwrap();
    let common = format!(
        "suite = eddsa\nledger.iota = tcp://{ledger_addr}\nledger_roots = ledger-pki/root.pem\ntrusted_issuers = issuers\ntrusted_dids = dids.txt\nx509_roots = server-pki/root.pem, client-pki/root.pem\n"
    );
    std::fs::write(
        d.join("server.conf"),
        format!("{common}x509_chain = server-pki/chain.pem\nx509_key = server-pki/leaf.key\ndid = {server}\ndid_key = server.key\nvc = server-vc.json\nclient_auth = mirror\n"),
    )
    .unwrap();
    std::fs::write(
        d.join("client.conf"),
        format!("{common}x509_chain = client-pki/chain.pem\nx509_key = client-pki/leaf.key\ndid = {client}\ndid_key = client.key\nvc = client-vc.json\nmode = vc\n"),
    )
    .unwrap();

    let (srv, addr, mut srv_out) =
        spawn(&["server", "--config", &p(d, "server.conf"), "--listen", "127.0.0.1:0", "--max-connections", "4"]);
    let mut srv = Kill(srv);
    let client_conf = p(d, "client.conf");

    let out = ok(&["client", "--config", &client_conf, "--connect", &addr, "--print-outcome", "--expect-flow", "ssi-vc", "--message", "ping"]);
    assert!(out.contains("flow: ssi-vc") && out.contains("mutual: true") && out.contains("reply: ping"), "{out}");
    assert!(out.contains(&server), "{out}");

    let out = run(&["client", "--config", &client_conf, "--connect", &addr, "--set", "mode=did", "--expect-flow", "ssi-vc"]);
    assert_eq!(out.status.code(), Some(3), "{}", String::from_utf8_lossy(&out.stderr));

    let out = ok(&["client", "--config", &client_conf, "--connect", &addr, "--set", "mode=x509", "--print-outcome"]);
    assert!(out.contains("flow: original") && out.contains("subject=server.test"), "{out}");

    let mut deactivate = vec!["identity", "did-deactivate", &server, "--key"];
    let server_key = p(d, "server.key");
    deactivate.push(&server_key);
    deactivate.extend(lg);
    ok(&deactivate);
    let out = run(&["client", "--config", &client_conf, "--connect", &addr]);
    assert_eq!(out.status.code(), Some(23), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(String::from_utf8_lossy(&out.stderr).contains("revoked_identity"));

    let status = srv.0.wait().unwrap();
    let mut log = String::new();
    while srv_out.read_line(&mut log).unwrap() > 0 {}
    assert_eq!(log.matches("accepted").count(), 3, "{log}");
    assert!(log.contains("flow=ssi-did"), "{log}");
    // The last connection was aborted by the client, so the server reports the received alert.
    assert_eq!(status.code(), Some(100 + 44), "{log}");
}

#[test]
fn plaintext_ledger_is_open_to_forgery() {
    let out = ok(&["ledger", "attack-demo", "--suite", "eddsa", "--trials", "2"]);
    assert!(out.contains("plaintext ledger channel: impersonated 2/2"), "{out}");
    assert!(out.contains("on-path attacker, authenticated ledger channel: impersonated 0/2"), "{out}");
}

#[test]
fn local_ledger_file_rotation() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let ledger = format!("dlt=file:{}", p(d, "dlt.log"));
    let did = ok(&["identity", "did-create", "--ledger", &ledger, "--suite", "ecdsa", "--key-out", &p(d, "k1")]);
    let did = did.trim();
    ok(&["identity", "did-update", did, "--ledger", &ledger, "--key", &p(d, "k1"), "--new-key-out", &p(d, "k2")]);
    let stale = run(&["identity", "did-update", did, "--ledger", &ledger, "--key", &p(d, "k1"), "--new-key-out", &p(d, "k3")]);
    assert_eq!(stale.status.code(), Some(1));
    ok(&["identity", "did-deactivate", did, "--ledger", &ledger, "--key", &p(d, "k2")]);
    let resolved = run(&["identity", "did-resolve", did, "--ledger", &ledger]);
    assert_eq!(resolved.status.code(), Some(23));
    assert_eq!(String::from_utf8_lossy(&resolved.stdout).trim(), "revoked");
}
