/* Shared scaffolding for the bare-metal self-checking programs.
 *
 * Convention (matching the standard test harness): gp holds the current case
 * number; on failure the program stores 2*gp+1 to tohost, on success 1.
 */
#ifndef COMMON_H
#define COMMON_H

#if __riscv_xlen == 64
#define SREG sd
#define LREG ld
#else
#define SREG sw
#define LREG lw
#endif

#define TEST_BEGIN   \
  .section .text;    \
  .globl _start;     \
  _start:

#define TEST(n) li gp, n

#define CHECK_EQ(a, b) bne a, b, fail

#define TEST_END      \
  pass:               \
  li t6, 1;           \
  la t5, tohost;      \
  SREG t6, 0(t5);     \
  11 : j 11b;         \
  fail:               \
  slli gp, gp, 1;     \
  ori gp, gp, 1;      \
  la t5, tohost;      \
  SREG gp, 0(t5);     \
  12 : j 12b;         \
  .section .tohost, "aw", @progbits; \
  .globl tohost;      \
  .align 3;           \
  tohost: .dword 0

#endif
