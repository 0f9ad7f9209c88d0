/** Big-endian cursor reader and writer for wire packets. */

export class Reader {
  private pos = 0;

  constructor(private readonly buf: Buffer) {}

  get remaining(): number {
    return this.buf.length - this.pos;
  }

  u8(): number {
    this.ensure(1);
    return this.buf.readUInt8(this.pos++);
  }

  u16(): number {
    this.ensure(2);
    const value = this.buf.readUInt16BE(this.pos);
    this.pos += 2;
    return value;
  }

  u32(): number {
    this.ensure(4);
    const value = this.buf.readUInt32BE(this.pos);
    this.pos += 4;
    return value;
  }

  /** Opaque identifier of the given byte width (object/thread/type ids). */
  id(size: number): bigint {
    this.ensure(size);
    let value = 0n;
    for (let i = 0; i < size; i++) {
      value = (value << 8n) | BigInt(this.buf[this.pos + i]);
    }
    this.pos += size;
    return value;
  }

  /** Length-prefixed UTF-8 string. */
  string(): string {
    const length = this.u32();
    this.ensure(length);
    const value = this.buf.toString("utf8", this.pos, this.pos + length);
    this.pos += length;
    return value;
  }

  private ensure(n: number): void {
    if (this.pos + n > this.buf.length) {
      throw new RangeError(`packet truncated: wanted ${n} bytes at offset ${this.pos}`);
    }
  }
}

export class Writer {
  private readonly chunks: Buffer[] = [];

  u8(value: number): this {
    this.chunks.push(Buffer.from([value & 0xff]));
    return this;
  }

  u16(value: number): this {
    const b = Buffer.alloc(2);
    b.writeUInt16BE(value);
    this.chunks.push(b);
    return this;
  }

  u32(value: number): this {
    const b = Buffer.alloc(4);
    b.writeUInt32BE(value >>> 0);
    this.chunks.push(b);
    return this;
  }

  id(value: bigint, size: number): this {
    const b = Buffer.alloc(size);
    let v = value;
    for (let i = size - 1; i >= 0; i--) {
      b[i] = Number(v & 0xffn);
      v >>= 8n;
    }
    this.chunks.push(b);
    return this;
  }

  string(value: string): this {
    const data = Buffer.from(value, "utf8");
    this.u32(data.length);
    this.chunks.push(data);
    return this;
  }

  raw(data: Buffer): this {
    this.chunks.push(data);
    return this;
  }

  build(): Buffer {
    return Buffer.concat(this.chunks);
  }
}
