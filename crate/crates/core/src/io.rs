//! Game files and solution artifacts.

use std::fs;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::model::{Game, GameSpec};

/// Reads and validates a JSON game file.
pub fn load_game(path: impl AsRef<Path>) -> Result<Game> {
    let spec: GameSpec = read_json(path)?;
    spec.validate()
}

pub fn read_json<T: DeserializeOwned>(path: impl AsRef<Path>) -> Result<T> {
    let text = fs::read_to_string(path.as_ref())?;
    Ok(serde_json::from_str(&text)?)
}

/// Pretty JSON with a trailing newline. Floats use the shortest
/// representation that round-trips, so output is byte-stable.
pub fn to_json<T: Serialize>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    Ok(s)
}

pub fn save_json<T: Serialize>(path: impl AsRef<Path>, value: &T) -> Result<()> {
    let path = path.as_ref();
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir)?;
    }
    fs::write(path, to_json(value)?).map_err(Error::from)
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Digest of a game file's bytes.
pub fn file_sha256(path: impl AsRef<Path>) -> Result<String> {
    Ok(sha256_hex(&fs::read(path)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::RandomGame;

    #[test]
    fn round_trip() {
        let spec = RandomGame::default().generate(4);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("g.json");
        save_json(&path, &spec).unwrap();
        let game = load_game(&path).unwrap();
        assert_eq!(game.spec(), spec.clone().validate().unwrap().spec());
        assert_eq!(to_json(&spec).unwrap(), fs::read_to_string(&path).unwrap());
    }

    #[test]
    fn parse_errors_carry_position() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.json");
        fs::write(&path, "{\n  \"name\": 3,\n}").unwrap();
        let msg = load_game(&path).unwrap_err().to_string();
        assert!(msg.contains("line 2"), "{msg}");
    }

    #[test]
    fn digest() {
        assert_eq!(
            sha256_hex(b"abc"),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"
        );
    }
}
