import * as fs from "fs";

/**
 * Reader/writer for the binary float-map container used by the feature
 * extraction CLI: 4-byte magic "FMAP", u32 LE version (1), u32 LE header
 * length, a canonical JSON header with alphabetically ordered keys
 * {dtype, height, name, width}, then the float32 LE row-major payload.
 */

export interface FloatMap {
  name: string;
  width: number;
  height: number;
  /** row-major, length width*height */
  values: Float32Array;
}

const MAGIC = "FMAP";

export function writeFmap(path: string, fm: FloatMap): void {
  if (fm.values.length !== fm.width * fm.height) {
    throw new Error(
      `fmap payload length ${fm.values.length} does not match ${fm.width}x${fm.height}`,
    );
  }
  // Key order and separators must match the canonical form the python
  // side emits (sorted keys, no whitespace), so the bytes round-trip.
  const header =
    `{"dtype":"f32le","height":${fm.height},` +
    `"name":${JSON.stringify(fm.name)},"width":${fm.width}}`;
  const headerBytes = Buffer.from(header, "utf-8");
  const buf = Buffer.alloc(12 + headerBytes.length + 4 * fm.values.length);
  buf.write(MAGIC, 0, "ascii");
  buf.writeUInt32LE(1, 4);
  buf.writeUInt32LE(headerBytes.length, 8);
  headerBytes.copy(buf, 12);
  let off = 12 + headerBytes.length;
  for (let i = 0; i < fm.values.length; i++) {
    buf.writeFloatLE(fm.values[i], off);
    off += 4;
  }
  fs.writeFileSync(path, buf);
}

export function readFmap(path: string): FloatMap {
  const buf = fs.readFileSync(path);
  if (buf.length < 12 || buf.toString("ascii", 0, 4) !== MAGIC) {
    throw new Error(`${path}: not a float-map file`);
  }
  const version = buf.readUInt32LE(4);
  if (version !== 1) {
    throw new Error(`${path}: unsupported version ${version}`);
  }
  const headerLen = buf.readUInt32LE(8);
  if (12 + headerLen > buf.length) {
    throw new Error(`${path}: truncated header`);
  }
  const header = JSON.parse(buf.toString("utf-8", 12, 12 + headerLen));
  if (header.dtype !== "f32le") {
    throw new Error(`${path}: unsupported dtype ${header.dtype}`);
  }
  const width = header.width | 0;
  const height = header.height | 0;
  const n = width * height;
  const start = 12 + headerLen;
  if (start + 4 * n > buf.length) {
    throw new Error(`${path}: truncated payload`);
  }
  const values = new Float32Array(n);
  for (let i = 0; i < n; i++) {
    values[i] = buf.readFloatLE(start + 4 * i);
  }
  return { name: String(header.name), width, height, values };
}
