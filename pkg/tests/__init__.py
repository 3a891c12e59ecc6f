"""Tests for fpinv"""
