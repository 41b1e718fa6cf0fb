//! Embedded key-value persistence with three isolated namespaces.
//!
//! | namespace | holds                                        | readable by        |
//! |-----------|----------------------------------------------|--------------------|
//! | election  | referendum, ballots, participation, log, ... | EA, Chair, T2, Panel |
//! | registrar | tokens by value; issued flags by voter       | registrar only     |
//! | claims    | identified dispute claims                    | Panel              |
//!
//! Role-gated reads go through [`Store::read`] and [`Store::scan`]; the
//! service itself uses [`Store::write`] as [`Principal::System`].

use std::path::Path;

use pvv_core::Role;
use redb::{Database, ReadableDatabase, ReadableTable, TableDefinition, WriteTransaction};
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Namespace {
    Election,
    Registrar,
    Claims,
}

impl Namespace {
    pub const ALL: [Namespace; 3] = [Namespace::Election, Namespace::Registrar, Namespace::Claims];

    fn table(self) -> TableDefinition<'static, &'static str, &'static [u8]> {
        match self {
            Namespace::Election => TableDefinition::new("election"),
            Namespace::Registrar => TableDefinition::new("registrar"),
            Namespace::Claims => TableDefinition::new("claims"),
        }
    }

    pub fn readable_by(self, who: Principal) -> bool {
        match (self, who) {
            (_, Principal::System) => true,
            (Namespace::Election, Principal::Role(r)) => r != Role::Voter,
            (Namespace::Registrar, Principal::Registrar) => true,
            (Namespace::Claims, Principal::Role(Role::Panel)) => true,
            _ => false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Principal {
    Role(Role),
    /// The token-issuing component.
    Registrar,
    /// The service process.
    System,
}

#[derive(Debug, Error)]
pub enum StoreError {
    #[error("{0:?} may not read the {1:?} namespace")]
    AccessDenied(Principal, Namespace),
    #[error("storage: {0}")]
    Db(#[from] redb::Error),
}

macro_rules! db_err {
    ($($t:ty),*) => {$(
        impl From<$t> for StoreError {
            fn from(e: $t) -> Self {
                StoreError::Db(e.into())
            }
        }
    )*};
}
db_err!(
    redb::DatabaseError,
    redb::TransactionError,
    redb::TableError,
    redb::StorageError,
    redb::CommitError
);

pub struct Store {
    db: Database,
}

impl Store {
    pub fn open(path: impl AsRef<Path>) -> Result<Self, StoreError> {
        Self::init(Database::create(path)?)
    }

    pub fn in_memory() -> Result<Self, StoreError> {
        Self::init(
            Database::builder().create_with_backend(redb::backends::InMemoryBackend::new())?,
        )
    }

    fn init(db: Database) -> Result<Self, StoreError> {
        let txn = db.begin_write()?;
        for ns in Namespace::ALL {
            txn.open_table(ns.table())?;
        }
        txn.commit()?;
        Ok(Self { db })
    }

    /// Runs `f` in one write transaction, committed iff `f` succeeds.
    pub fn write<T, E>(&self, f: impl FnOnce(&mut Txn) -> Result<T, E>) -> Result<T, E>
    where
        E: From<StoreError>,
    {
        let mut txn = Txn {
            inner: self.db.begin_write().map_err(StoreError::from)?,
        };
        let out = f(&mut txn)?;
        txn.inner.commit().map_err(StoreError::from)?;
        Ok(out)
    }

    pub fn read(
        &self,
        who: Principal,
        ns: Namespace,
        key: &str,
    ) -> Result<Option<Vec<u8>>, StoreError> {
        if !ns.readable_by(who) {
            return Err(StoreError::AccessDenied(who, ns));
        }
        let txn = self.db.begin_read()?;
        let table = txn.open_table(ns.table())?;
        Ok(table.get(key)?.map(|v| v.value().to_vec()))
    }

    /// Every `(key, value)` in `ns` whose key starts with `prefix`.
    pub fn scan(
        &self,
        who: Principal,
        ns: Namespace,
        prefix: &str,
    ) -> Result<Vec<(String, Vec<u8>)>, StoreError> {
        if !ns.readable_by(who) {
            return Err(StoreError::AccessDenied(who, ns));
        }
        let txn = self.db.begin_read()?;
        let table = txn.open_table(ns.table())?;
        let mut out = Vec::new();
        for item in table.range(prefix..)? {
            let (k, v) = item?;
            if !k.value().starts_with(prefix) {
                break;
            }
            out.push((k.value().to_owned(), v.value().to_vec()));
        }
        Ok(out)
    }
}

/// A write transaction with unrestricted access.
pub struct Txn {
    inner: WriteTransaction,
}

impl Txn {
    pub fn get(&self, ns: Namespace, key: &str) -> Result<Option<Vec<u8>>, StoreError> {
        let table = self.inner.open_table(ns.table())?;
        let v = table.get(key)?.map(|v| v.value().to_vec());
        Ok(v)
    }

    pub fn put(&mut self, ns: Namespace, key: &str, value: &[u8]) -> Result<(), StoreError> {
        let mut table = self.inner.open_table(ns.table())?;
        table.insert(key, value)?;
        Ok(())
    }

    pub fn delete(&mut self, ns: Namespace, key: &str) -> Result<(), StoreError> {
        let mut table = self.inner.open_table(ns.table())?;
        table.remove(key)?;
        Ok(())
    }
}
